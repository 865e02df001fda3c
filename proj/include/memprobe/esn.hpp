#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "memprobe/mat.hpp"
#include "memprobe/prng.hpp"
#include "memprobe/sweep.hpp"

namespace memprobe {

struct EsnConfig {
    int neurons = 50;
    double connectivity = 0.01;
    double spectral_radius = 0.9;
    double input_scaling = 1.0;
    double ridge_lambda = 1e-6;
    int washout = 100;
    int stream_len = 2000;  // training rows; the held-out continuation has the same length
    int max_delay = 0;      // 0 means 2 * neurons
    std::uint32_t seed = 0;
    // tanh reservoir by default; the linear mode exists for the delay-line
    // oracle, where capacity is exactly computable.
    bool linear = false;

    int delay_count() const { return max_delay > 0 ? max_delay : 2 * neurons; }
    void validate() const;
};

struct Reservoir {
    Mat w_in;          // N x 1
    SparseMat w_res;   // N x N, rescaled to the configured spectral radius
    bool linear = false;
    // Per-delay readout weights (N+1 with trailing bias), filled by
    // memory_capacity.
    std::vector<std::vector<double>> readouts;
};

// Entries placed i.i.d. with the configured connectivity, values
// Uniform[-1,1], rescaled so the spectral radius matches. Draws whose radius
// estimate is below 0.01 (almost surely an acyclic wiring, common at 1%
// connectivity) are redrawn from the same stream; the retry budget keeps
// construction deterministic per seed.
Reservoir build_reservoir(const EsnConfig& config);

// h_t = act(W_in x_t + W_res h_{t-1}) from h_0 = 0; row t holds h_{t+1}.
Mat run_states(const Reservoir& r, const std::vector<double>& input);
// Same, from an explicit initial state (echo-state-property checks).
Mat run_states(const Reservoir& r, const std::vector<double>& input,
               const std::vector<double>& h0);

// Solves (X^T X + lambda I) w = X^T y with X = [states | 1]; returns the
// N+1 weights, bias last. Rejects singular systems (lambda = 0 on
// rank-deficient states) with a hint to raise lambda.
std::vector<double> ridge_readout(const Mat& states, const std::vector<double>& targets,
                                  double lambda);

struct McResult {
    std::vector<double> mc_k;  // delay k = 1 .. K at index k-1
    double total = 0.0;
};

// Jaeger's memory capacity: drive the reservoir with an i.i.d.
// Uniform[-0.5,0.5] stream, ridge-train one readout per delay k to
// reconstruct x(t-k), and score the squared correlation on a held-out
// continuation. jobs > 1 distributes the independent delays.
McResult memory_capacity(Reservoir& r, const EsnConfig& config, int jobs = 1);
McResult memory_capacity(const EsnConfig& config, int jobs = 1);

// Rows `N,connectivity,rho,seed,k,mc_k` for k = 1..K, then a `total` row.
void write_mc_csv(std::ostream& out, const EsnConfig& config, const McResult& mc);

struct LearnedPositions {
    struct Row {
        CellKind model = CellKind::rnn;
        int layers = 0;
        int cells = 0;
        int learned = 0;  // positions with mean MAE below the threshold
        int bound = 0;    // c*l - (l-1), the observed capacity ceiling
    };
    std::vector<Row> rows;
};

// Count of positions each trained configuration reproduces below the loss
// threshold: the memory-capacity proxy for backprop-trained networks.
LearnedPositions learned_positions(const SweepGrid& grid, double threshold = 0.05);

}  // namespace memprobe
