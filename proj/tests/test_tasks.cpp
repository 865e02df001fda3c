#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprobe/csvio.hpp"
#include "memprobe/prng.hpp"
#include "memprobe/tasks.hpp"

using memprobe::Episode;
using memprobe::Prng;
using memprobe::TaskKind;
using memprobe::TaskSpec;

TEST_CASE("targets are the pth element from the end") {
    Prng rng(1);
    for (int p : {1, 3, 10}) {
        const TaskSpec spec = TaskSpec::random_mem(p);
        for (int i = 0; i < 200; ++i) {
            const Episode ep = memprobe::gen_random(spec, rng);
            REQUIRE(ep.q >= 10);
            REQUIRE(ep.q <= 15);
            REQUIRE(static_cast<int>(ep.x.size()) == ep.q);
            REQUIRE(ep.p == p);
            REQUIRE(ep.target == ep.x[ep.q - p]);
            for (double v : ep.x) {
                REQUIRE(v >= 0.0);
                REQUIRE(v < 1.0);
            }
        }
    }
}

TEST_CASE("fixed task always yields length ten") {
    Prng rng(2);
    const TaskSpec spec = TaskSpec::fixed_mem(4);
    for (int i = 0; i < 500; ++i) {
        const Episode ep = memprobe::gen_fixed(spec, rng);
        REQUIRE(ep.q == 10);
        REQUIRE(ep.target == ep.x[6]);
    }
}

TEST_CASE("sequence lengths are uniform over 10..15") {
    Prng rng(3);
    const TaskSpec spec = TaskSpec::random_mem(1);
    int counts[6] = {};
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[memprobe::gen_random(spec, rng).q - 10];
    for (int k = 0; k < 6; ++k) {
        CAPTURE(k);
        CHECK(static_cast<double>(counts[k]) / n == doctest::Approx(1.0 / 6).epsilon(0.12));
    }
}

TEST_CASE("correlated sequences repeat their last element exactly") {
    // alpha_q = q/q = 1, so x_q must equal x_{q-1} bit for bit
    Prng rng(4);
    const TaskSpec spec = TaskSpec::correlated_mem(1);
    for (int i = 0; i < 500; ++i) {
        const Episode ep = memprobe::gen_correlated(spec, rng);
        REQUIRE(ep.x[ep.q - 1] == ep.x[ep.q - 2]);
        REQUIRE(ep.target == ep.x[ep.q - 1]);
    }
}

TEST_CASE("correlated sequences follow the blending recurrence") {
    // regenerate from the same seed and replay the recurrence by hand
    const TaskSpec spec = TaskSpec::correlated_mem(2);
    Prng a(5), b(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Episode ep = memprobe::gen_correlated(spec, a);
        const int q = b.uniform_int(10, 15);
        REQUIRE(q == ep.q);
        std::vector<double> x(q);
        x[0] = b.uniform(0.0, 1.0);
        for (int i = 2; i <= q; ++i) {
            const double y = b.uniform(0.0, 1.0);
            const double alpha = static_cast<double>(i) / q;
            x[i - 1] = alpha * x[i - 2] + (1.0 - alpha) * y;
        }
        REQUIRE(ep.x == x);
    }
}

TEST_CASE("lag-one correlation separates the two input distributions") {
    auto pooled_lag1 = [](TaskKind kind) {
        const TaskSpec spec{kind, 10, 15, 1};
        Prng rng(6);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        long n = 0;
        for (int e = 0; e < 20000; ++e) {
            const Episode ep = memprobe::gen_episode(spec, rng);
            for (int i = 0; i + 1 < ep.q; ++i) {
                const double u = ep.x[i], v = ep.x[i + 1];
                sx += u; sy += v; sxx += u * u; syy += v * v; sxy += u * v;
                ++n;
            }
        }
        const double cov = sxy / n - (sx / n) * (sy / n);
        const double vu = sxx / n - (sx / n) * (sx / n);
        const double vv = syy / n - (sy / n) * (sy / n);
        return cov / std::sqrt(vu * vv);
    };

    CHECK(std::fabs(pooled_lag1(TaskKind::random_mem)) < 0.01);
    CHECK(pooled_lag1(TaskKind::correlated_mem) > 0.3);
}

TEST_CASE("guessing one half loses a quarter on average") {
    Prng rng(7);
    const double b = memprobe::baseline_mae(TaskSpec::random_mem(1), 100000, rng);
    CHECK(b == doctest::Approx(0.25).epsilon(0.008));
}

TEST_CASE("baseline with an injected constant-target source") {
    Prng rng(8);
    auto gen = [](Prng&) {
        Episode ep;
        ep.target = 0.5;
        return ep;
    };
    CHECK(memprobe::baseline_mae_with(gen, 100, rng) == 0.0);
}

TEST_CASE("correlated targets sit closer to one half than random ones") {
    Prng rng(9);
    const double b = memprobe::baseline_mae(TaskSpec::correlated_mem(1), 50000, rng);
    CHECK(b > 0.02);
    CHECK(b < 0.22);
}

TEST_CASE("episode generation is deterministic in the seed") {
    const TaskSpec spec = TaskSpec::random_mem(3);
    Prng a(10), b(10);
    for (int i = 0; i < 100; ++i) {
        const Episode ea = memprobe::gen_episode(spec, a);
        const Episode eb = memprobe::gen_episode(spec, b);
        REQUIRE(ea.x == eb.x);
        REQUIRE(ea.target == eb.target);
    }
}

TEST_CASE("task spec validation") {
    CHECK_THROWS_AS(TaskSpec::random_mem(0), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::random_mem(11), std::invalid_argument);  // p > q_min
    CHECK_THROWS_AS(TaskSpec::random_mem(1, 9, 15), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::random_mem(1, 12, 11), std::invalid_argument);
    CHECK_THROWS_AS(TaskSpec::fixed_mem(11), std::invalid_argument);
    CHECK_NOTHROW(TaskSpec::random_mem(10));
    CHECK_NOTHROW(TaskSpec::fixed_mem(10));

    Prng rng(11);
    const TaskSpec random_spec = TaskSpec::random_mem(1);
    CHECK_THROWS_AS(memprobe::gen_fixed(random_spec, rng), std::invalid_argument);
    CHECK_THROWS_AS(memprobe::baseline_mae(random_spec, 0, rng), std::invalid_argument);
}

TEST_CASE("episode dump is well-formed csv") {
    Prng rng(12);
    std::ostringstream out;
    memprobe::dump_episodes_csv(out, TaskSpec::random_mem(2), 20, rng);

    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("episode_id,q,p,target,x_1", 0) == 0);

    int rows = 0;
    while (std::getline(in, line)) {
        const auto fields = memprobe::split_csv_line(line);
        REQUIRE(fields.size() >= 4);
        const int q = std::stoi(fields[1]);
        const int p = std::stoi(fields[2]);
        REQUIRE(static_cast<int>(fields.size()) == 4 + q);
        const double target = memprobe::parse_double(fields[3]);
        const double xqp = memprobe::parse_double(fields[3 + q + 1 - p]);
        REQUIRE(target == xqp);
        ++rows;
    }
    CHECK(rows == 20);
}
