#include "memprobe/esn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "memprobe/csvio.hpp"

namespace memprobe {

void EsnConfig::validate() const {
    if (neurons < 1) throw std::invalid_argument("EsnConfig: neurons >= 1");
    if (!(connectivity > 0.0 && connectivity <= 1.0))
        throw std::invalid_argument("EsnConfig: connectivity in (0, 1]");
    if (!(spectral_radius > 0.0 && spectral_radius < 1.0))
        throw std::invalid_argument("EsnConfig: spectral radius in (0, 1)");
    if (input_scaling <= 0.0) throw std::invalid_argument("EsnConfig: input_scaling > 0");
    if (ridge_lambda < 0.0) throw std::invalid_argument("EsnConfig: ridge_lambda >= 0");
    if (washout < 0 || stream_len < 1 || washout >= stream_len)
        throw std::invalid_argument("EsnConfig: requires 0 <= washout < stream_len");
    if (max_delay < 0) throw std::invalid_argument("EsnConfig: max_delay >= 0");
    if (delay_count() > washout + stream_len)
        throw std::invalid_argument("EsnConfig: max delay exceeds the available history");
}

Reservoir build_reservoir(const EsnConfig& config) {
    config.validate();
    const int n = config.neurons;
    Prng rng(config.seed);

    Reservoir r;
    r.linear = config.linear;
    r.w_in = Mat(n, 1);
    for (int i = 0; i < n; ++i)
        r.w_in(i, 0) = rng.uniform(-config.input_scaling, config.input_scaling);

    // At 1% connectivity roughly half the draws wire an acyclic graph whose
    // spectral radius is exactly zero and cannot be rescaled. Such draws are
    // discarded and the stream simply continues, so the result stays a pure
    // function of the seed.
    for (int attempt = 0; attempt < 100; ++attempt) {
        SparseMat w(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (rng.next_unit() < config.connectivity)
                    w.push_unchecked(i, j, rng.uniform(-1.0, 1.0));
        const double radius = spectral_radius(w);
        if (radius >= 0.01) {
            w.scale(config.spectral_radius / radius);
            r.w_res = std::move(w);
            return r;
        }
    }
    throw std::runtime_error(
        "build_reservoir: no wiring with usable spectral radius in 100 draws; "
        "raise connectivity or neurons");
}

Mat run_states(const Reservoir& r, const std::vector<double>& input,
               const std::vector<double>& h0) {
    const int n = r.w_in.rows();
    if (static_cast<int>(h0.size()) != n)
        throw std::invalid_argument("run_states: initial state size mismatch");
    if (r.w_res.rows() != n || r.w_res.cols() != n)
        throw std::invalid_argument("run_states: reservoir shape mismatch");

    Mat states(static_cast<int>(input.size()), n);
    std::vector<double> h = h0;
    std::vector<double> pre(n);
    for (std::size_t t = 0; t < input.size(); ++t) {
        for (int i = 0; i < n; ++i) pre[i] = r.w_in(i, 0) * input[t];
        for (const SparseMat::Entry& e : r.w_res.entries()) pre[e.row] += e.value * h[e.col];
        for (int i = 0; i < n; ++i) {
            h[i] = r.linear ? pre[i] : std::tanh(pre[i]);
            states(static_cast<int>(t), i) = h[i];
        }
    }
    return states;
}

Mat run_states(const Reservoir& r, const std::vector<double>& input) {
    return run_states(r, input, std::vector<double>(r.w_in.rows(), 0.0));
}

std::vector<double> ridge_readout(const Mat& states, const std::vector<double>& targets,
                                  double lambda) {
    const int t_rows = states.rows();
    const int n = states.cols();
    if (static_cast<int>(targets.size()) != t_rows)
        throw std::invalid_argument("ridge_readout: states/targets length mismatch");
    if (t_rows < 1) throw std::invalid_argument("ridge_readout: empty system");
    if (lambda < 0.0) throw std::invalid_argument("ridge_readout: lambda >= 0");

    // normal equations over X = [states | 1]
    const int d = n + 1;
    Mat g(d, d);
    std::vector<double> rhs(d, 0.0);
    for (int t = 0; t < t_rows; ++t) {
        const double* row = states.data() + static_cast<std::size_t>(t) * n;
        for (int a = 0; a < n; ++a) {
            const double xa = row[a];
            if (xa != 0.0) {
                double* grow = g.data() + static_cast<std::size_t>(a) * d;
                for (int b = a; b < n; ++b) grow[b] += xa * row[b];
                grow[n] += xa;
            }
            rhs[a] += xa * targets[t];
        }
        g(n, n) += 1.0;
        rhs[n] += targets[t];
    }
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b) g(b, a) = g(a, b);

    double scale = 0.0;
    for (int a = 0; a < d; ++a) scale = std::max(scale, g(a, a));
    for (int a = 0; a < d; ++a) g(a, a) += lambda;

    // in-place Cholesky, lower triangle
    for (int k = 0; k < d; ++k) {
        double pivot = g(k, k);
        for (int j = 0; j < k; ++j) pivot -= g(k, j) * g(k, j);
        if (pivot <= scale * 1e-13)
            throw std::runtime_error(
                "ridge_readout: normal equations are singular; use lambda > 0");
        const double lkk = std::sqrt(pivot);
        g(k, k) = lkk;
        for (int i = k + 1; i < d; ++i) {
            double v = g(i, k);
            for (int j = 0; j < k; ++j) v -= g(i, j) * g(k, j);
            g(i, k) = v / lkk;
        }
    }

    // L y = rhs, then L^T w = y
    std::vector<double> w(d);
    for (int i = 0; i < d; ++i) {
        double v = rhs[i];
        for (int j = 0; j < i; ++j) v -= g(i, j) * w[j];
        w[i] = v / g(i, i);
    }
    for (int i = d - 1; i >= 0; --i) {
        double v = w[i];
        for (int j = i + 1; j < d; ++j) v -= g(j, i) * w[j];
        w[i] = v / g(i, i);
    }
    return w;
}

namespace {

// squared Pearson correlation; zero variance on either side scores 0
double squared_correlation(const std::vector<double>& u, const std::vector<double>& v) {
    const std::size_t n = u.size();
    double su = 0, sv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        su += u[i];
        sv += v[i];
    }
    const double mu = su / n, mv = sv / n;
    double cuv = 0, cuu = 0, cvv = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double du = u[i] - mu, dv = v[i] - mv;
        cuv += du * dv;
        cuu += du * du;
        cvv += dv * dv;
    }
    if (cuu == 0.0 || cvv == 0.0) return 0.0;
    return (cuv * cuv) / (cuu * cvv);
}

}  // namespace

McResult memory_capacity(Reservoir& r, const EsnConfig& config, int jobs) {
    config.validate();
    if (r.w_in.rows() != config.neurons)
        throw std::invalid_argument("memory_capacity: reservoir/config size mismatch");
    if (jobs < 1) jobs = 1;

    const int n = config.neurons;
    const int k_max = config.delay_count();
    const int washout = config.washout;
    const int t_len = config.stream_len;
    const int total_len = washout + 2 * t_len;

    Prng stream(derive_seed("esn-stream|" + std::to_string(config.seed)));
    std::vector<double> x(total_len);
    for (double& v : x) v = stream.uniform(-0.5, 0.5);

    const Mat states = run_states(r, x);

    McResult mc;
    mc.mc_k.assign(k_max, 0.0);
    r.readouts.assign(k_max, {});

    bool failed = false;
    std::string error;

#pragma omp parallel for schedule(dynamic) if (jobs > 1) num_threads(jobs)
    for (int k = 1; k <= k_max; ++k) {
        try {
            const int t0 = std::max(washout, k);
            const int train_rows = washout + t_len - t0;
            Mat train_s(train_rows, n);
            std::vector<double> train_y(train_rows);
            for (int t = t0; t < washout + t_len; ++t) {
                for (int i = 0; i < n; ++i) train_s(t - t0, i) = states(t, i);
                train_y[t - t0] = x[t - k];
            }
            const std::vector<double> w = ridge_readout(train_s, train_y, config.ridge_lambda);

            std::vector<double> pred(t_len), truth(t_len);
            for (int t = washout + t_len; t < total_len; ++t) {
                double y = w[n];
                const double* row = states.data() + static_cast<std::size_t>(t) * n;
                for (int i = 0; i < n; ++i) y += w[i] * row[i];
                pred[t - washout - t_len] = y;
                truth[t - washout - t_len] = x[t - k];
            }
            mc.mc_k[k - 1] = squared_correlation(truth, pred);
            r.readouts[k - 1] = w;
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                error = e.what();
            }
        }
    }
    if (failed) throw std::runtime_error("memory_capacity: " + error);

    for (double v : mc.mc_k) mc.total += v;
    return mc;
}

McResult memory_capacity(const EsnConfig& config, int jobs) {
    Reservoir r = build_reservoir(config);
    return memory_capacity(r, config, jobs);
}

void write_mc_csv(std::ostream& out, const EsnConfig& config, const McResult& mc) {
    out << "N,connectivity,rho,seed,k,mc_k\n";
    const std::string prefix = std::to_string(config.neurons) + ',' +
                               fmt_double(config.connectivity) + ',' +
                               fmt_double(config.spectral_radius) + ',' +
                               std::to_string(config.seed) + ',';
    for (std::size_t k = 0; k < mc.mc_k.size(); ++k)
        out << prefix << (k + 1) << ',' << fmt_double(mc.mc_k[k]) << '\n';
    out << prefix << "total," << fmt_double(mc.total) << '\n';
}

LearnedPositions learned_positions(const SweepGrid& grid, double threshold) {
    if (grid.cells.empty())
        throw std::invalid_argument("learned_positions: empty grid");

    std::map<std::tuple<CellKind, int, int>, int> counts;
    for (const GridCell& cell : grid.cells) {
        auto key = std::make_tuple(cell.model, cell.layers, cell.cells);
        counts.try_emplace(key, 0);
        if (cell.mean_mae < threshold) ++counts[key];
    }

    LearnedPositions out;
    for (const auto& [key, learned] : counts) {
        LearnedPositions::Row row;
        row.model = std::get<0>(key);
        row.layers = std::get<1>(key);
        row.cells = std::get<2>(key);
        row.learned = learned;
        row.bound = row.cells * row.layers - (row.layers - 1);
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace memprobe
