#include "memprobe/mat.hpp"

#include <cmath>
#include <stdexcept>

#include "memprobe/prng.hpp"

namespace memprobe {

Mat::Mat(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dimension");
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double SparseMat::density() const {
    if (rows_ == 0 || cols_ == 0) return 0.0;
    return static_cast<double>(entries_.size()) /
           (static_cast<double>(rows_) * static_cast<double>(cols_));
}

void SparseMat::add(int row, int col, double value) {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
        throw std::invalid_argument("SparseMat::add: index out of range");
    for (const Entry& e : entries_)
        if (e.row == row && e.col == col)
            throw std::invalid_argument("SparseMat::add: duplicate entry");
    entries_.push_back({row, col, value});
}

void SparseMat::scale(double factor) {
    for (Entry& e : entries_) e.value *= factor;
}

Mat SparseMat::to_dense() const {
    Mat m(rows_, cols_);
    for (const Entry& e : entries_) m(e.row, e.col) = e.value;
    return m;
}

std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
    if (static_cast<std::size_t>(a.cols()) != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    const double* row = a.data();
    for (int i = 0; i < a.rows(); ++i, row += a.cols()) {
        double acc = 0.0;
        for (int j = 0; j < a.cols(); ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

std::vector<double> matvec(const SparseMat& a, const std::vector<double>& x) {
    if (static_cast<std::size_t>(a.cols()) != x.size())
        throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (const SparseMat::Entry& e : a.entries()) y[e.row] += e.value * x[e.col];
    return y;
}

std::vector<double> matvec_t(const Mat& a, const std::vector<double>& x) {
    if (static_cast<std::size_t>(a.rows()) != x.size())
        throw std::invalid_argument("matvec_t: dimension mismatch");
    std::vector<double> y(a.cols(), 0.0);
    const double* row = a.data();
    for (int i = 0; i < a.rows(); ++i, row += a.cols())
        for (int j = 0; j < a.cols(); ++j) y[j] += row[j] * x[i];
    return y;
}

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += t * t;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Largest |root| of lambda^2 - alpha*lambda - beta = 0.
double dominant_root_magnitude(double alpha, double beta) {
    const double disc = alpha * alpha + 4.0 * beta;
    if (disc >= 0.0) {
        const double r = std::sqrt(disc);
        return std::fmax(std::fabs((alpha + r) / 2.0), std::fabs((alpha - r) / 2.0));
    }
    // complex pair: |lambda|^2 = -beta
    return std::sqrt(-beta);
}

}  // namespace

double spectral_radius(const SparseMat& a, int iters) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("spectral_radius: matrix must be square");
    const int n = a.rows();
    if (n == 0 || a.nnz() == 0) return 0.0;

    // Deterministic seeded start vector (same estimate on every run).
    Prng rng(0x9e3779b9u);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    double nx = norm2(x);
    for (double& v : x) v /= nx;

    double est = 0.0, prev = -1.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<double> y = matvec(a, x);
        const double ny = norm2(y);  // plain estimate, |x| = 1
        if (ny == 0.0) return 0.0;   // x landed in the kernel (e.g. nilpotent A)

        // Least-squares fit z = alpha*y + beta*x, solved in an orthonormal
        // basis of span{x, y}. When y has almost no component off x the
        // iterate is an eigendirection and the fit is pure noise, so the
        // plain estimate takes over; when a complex-conjugate pair keeps the
        // subspace two-dimensional the fit stays well conditioned while the
        // plain estimate oscillates forever.
        const double proj = dot(y, x);
        std::vector<double> resid(n);
        for (int i = 0; i < n; ++i) resid[i] = y[i] - proj * x[i];
        const double nres = norm2(resid);
        if (nres > 1e-8 * ny) {
            const std::vector<double> z = matvec(a, y);
            const double c1 = dot(z, x);
            double c2 = 0.0;
            for (int i = 0; i < n; ++i) c2 += z[i] * resid[i];
            c2 /= nres;
            const double alpha = c2 / nres;
            const double beta = c1 - alpha * proj;
            est = dominant_root_magnitude(alpha, beta);
        } else {
            est = ny;
        }
        if (std::fabs(est - prev) < 1e-10) break;
        prev = est;
        for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    }

    // The fit resolves at most two dominant eigenvalues. A matrix built from
    // disjoint cycles (the typical shape of a very sparse reservoir) carries
    // whole rings of equal-magnitude eigenvalues, and the fit can settle on a
    // confidently wrong answer. Cross-check against the mean geometric growth
    // rate of the iterate, which converges for any spectrum: the oscillating
    // part of log|A^k x| is bounded, so averaging over a long window leaves
    // an O(1/window) error. Keep the fit estimate when both agree (it carries
    // more digits); otherwise trust the growth rate.
    const int settle = 10000, window = 10000;
    double logsum = 0.0;
    for (int it = 0; it < settle + window; ++it) {
        std::vector<double> y = matvec(a, x);
        const double ny = norm2(y);
        if (ny == 0.0) return 0.0;
        if (it >= settle) logsum += std::log(ny);
        for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    const double growth = std::exp(logsum / window);
    if (std::fabs(est - growth) <= 3e-3 * growth) return est;
    return growth;
}

}  // namespace memprobe
