#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "memprobe/mat.hpp"
#include "memprobe/prng.hpp"

using memprobe::Mat;
using memprobe::Prng;
using memprobe::SparseMat;

namespace {

SparseMat random_sparse(int n, double density, std::uint32_t seed) {
    Prng rng(seed);
    SparseMat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (rng.next_unit() < density) a.push_unchecked(i, j, rng.uniform(-1.0, 1.0));
    return a;
}

double eigen_radius(const SparseMat& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
    for (const auto& e : a.entries()) m(e.row, e.col) = e.value;
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dense matvec on a worked example") {
    Mat a(2, 3);
    a(0, 0) = 1; a(0, 1) = 2; a(0, 2) = 3;
    a(1, 0) = 4; a(1, 1) = 5; a(1, 2) = 6;
    const std::vector<double> x = {1.0, -1.0, 2.0};
    const auto y = matvec(a, x);
    REQUIRE(y.size() == 2);
    CHECK(y[0] == 5.0);
    CHECK(y[1] == 11.0);

    const auto yt = matvec_t(a, std::vector<double>{1.0, 1.0});
    REQUIRE(yt.size() == 3);
    CHECK(yt[0] == 5.0);
    CHECK(yt[1] == 7.0);
    CHECK(yt[2] == 9.0);
}

TEST_CASE("identity maps x to x") {
    const Mat id = Mat::identity(4);
    const std::vector<double> x = {1.5, -2.0, 0.25, 9.0};
    CHECK(matvec(id, x) == x);
}

TEST_CASE("matvec is linear") {
    Prng rng(21);
    Mat a(20, 20);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-1.0, 1.0);
    std::vector<double> x(20), y(20);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);

    const double alpha = 0.7, beta = -1.3;
    std::vector<double> combo(20);
    for (int i = 0; i < 20; ++i) combo[i] = alpha * x[i] + beta * y[i];

    const auto lhs = matvec(a, combo);
    const auto ax = matvec(a, x);
    const auto ay = matvec(a, y);
    for (int i = 0; i < 20; ++i)
        CHECK(lhs[i] == doctest::Approx(alpha * ax[i] + beta * ay[i]).epsilon(1e-12));
}

TEST_CASE("transpose matvec agrees with the inner-product identity") {
    Prng rng(22);
    Mat a(7, 5);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform(-2.0, 2.0);
    std::vector<double> x(5), y(7);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    for (auto& v : y) v = rng.uniform(-1.0, 1.0);

    // y . (A x) == (A^T y) . x
    const auto ax = matvec(a, x);
    const auto aty = matvec_t(a, y);
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < 7; ++i) lhs += y[i] * ax[i];
    for (int i = 0; i < 5; ++i) rhs += aty[i] * x[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("sparse matvec agrees with its dense expansion") {
    const SparseMat a = random_sparse(30, 0.15, 5);
    const Mat d = a.to_dense();
    Prng rng(6);
    std::vector<double> x(30);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    const auto ys = matvec(a, x);
    const auto yd = matvec(d, x);
    for (int i = 0; i < 30; ++i) CHECK(ys[i] == doctest::Approx(yd[i]).epsilon(1e-14));
}

TEST_CASE("sparse bookkeeping: duplicates, density, scaling") {
    SparseMat a(10, 10);
    a.add(1, 2, 0.5);
    a.add(3, 4, -1.0);
    CHECK_THROWS_AS(a.add(1, 2, 0.7), std::invalid_argument);
    CHECK(a.nnz() == 2);
    CHECK(a.density() == doctest::Approx(0.02));

    a.scale(3.0);
    const Mat d = a.to_dense();
    CHECK(d(1, 2) == 1.5);
    CHECK(d(3, 4) == -3.0);
}

TEST_CASE("spectral radius of hand-solved matrices") {
    SUBCASE("diagonal") {
        SparseMat a(3, 3);
        a.add(0, 0, 3.0);
        a.add(1, 1, -1.0);
        a.add(2, 2, 2.0);
        CHECK(memprobe::spectral_radius(a) == doctest::Approx(3.0).epsilon(1e-8));
    }
    SUBCASE("rotation with a complex pair") {
        // eigenvalues are +/- i, so plain power iteration would oscillate
        SparseMat a(2, 2);
        a.add(0, 1, -1.0);
        a.add(1, 0, 1.0);
        CHECK(memprobe::spectral_radius(a) == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("scaled rotation") {
        SparseMat a(2, 2);
        a.add(0, 1, -2.0);
        a.add(1, 0, 2.0);
        CHECK(memprobe::spectral_radius(a) == doctest::Approx(2.0).epsilon(1e-8));
    }
    SUBCASE("nilpotent") {
        SparseMat a(2, 2);
        a.add(0, 1, 1.0);
        CHECK(memprobe::spectral_radius(a) == doctest::Approx(0.0));
    }
    SUBCASE("empty") {
        SparseMat a(4, 4);
        CHECK(memprobe::spectral_radius(a) == 0.0);
    }
    SUBCASE("non-square rejected") {
        SparseMat a(2, 3);
        CHECK_THROWS_AS(memprobe::spectral_radius(a), std::invalid_argument);
    }
}

TEST_CASE("spectral radius matches a dense eigensolver on random matrices") {
    for (std::uint32_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const SparseMat a = random_sparse(50, 0.05, seed);
        const double mine = memprobe::spectral_radius(a);
        const double ref = eigen_radius(a);
        CAPTURE(seed);
        CHECK(std::fabs(mine - ref) <= 1e-6 * std::max(1.0, ref));
    }
    for (std::uint32_t seed : {10u, 11u, 12u}) {
        const SparseMat a = random_sparse(30, 0.3, seed);
        const double mine = memprobe::spectral_radius(a);
        const double ref = eigen_radius(a);
        CAPTURE(seed);
        CHECK(std::fabs(mine - ref) <= 1e-6 * std::max(1.0, ref));
    }
}

TEST_CASE("spectral radius survives spectra made of equal-magnitude rings") {
    // A union of disjoint cycles has eigenvalues spread on circles, one ring
    // per cycle; nothing dominates and two-term extrapolation alone settles
    // on a wrong value. Radii here are exactly |product of cycle weights|^(1/len).
    SUBCASE("two competing cycles") {
        SparseMat a(7, 7);
        a.add(0, 1, 0.9);
        a.add(1, 2, 0.8);
        a.add(2, 0, 1.1);  // 3-cycle, radius (0.9*0.8*1.1)^(1/3)
        a.add(3, 4, -0.7);
        a.add(4, 5, 0.9);
        a.add(5, 6, 1.2);
        a.add(6, 3, 0.8);  // 4-cycle, radius (0.7*0.9*1.2*0.8)^(1/4)
        const double r3 = std::pow(0.9 * 0.8 * 1.1, 1.0 / 3.0);
        const double r4 = std::pow(0.7 * 0.9 * 1.2 * 0.8, 1.0 / 4.0);
        CHECK(memprobe::spectral_radius(a) ==
              doctest::Approx(std::max(r3, r4)).epsilon(3e-3));
    }
    SUBCASE("very sparse random wirings against the dense eigensolver") {
        for (std::uint32_t seed : {21u, 22u, 23u, 24u, 25u, 26u, 27u, 28u}) {
            const SparseMat a = random_sparse(50, 0.01, seed);
            const double ref = eigen_radius(a);
            const double mine = memprobe::spectral_radius(a);
            CAPTURE(seed);
            if (ref < 1e-6) {
                // nilpotent draw; the dense solver reports roundoff fuzz
                CHECK(mine <= 1e-6);
            } else {
                CHECK(std::fabs(mine - ref) <= 3e-3 * ref);
            }
        }
    }
}

TEST_CASE("spectral radius scales linearly with the matrix") {
    SparseMat a = random_sparse(40, 0.1, 77);
    const double r1 = memprobe::spectral_radius(a);
    a.scale(2.0);
    const double r2 = memprobe::spectral_radius(a);
    CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-8));
}
