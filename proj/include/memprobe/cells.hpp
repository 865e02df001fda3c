#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memprobe/mat.hpp"
#include "memprobe/prng.hpp"

namespace memprobe {

enum class CellKind { rnn, lstm, gru };

const char* to_string(CellKind kind);
CellKind cell_kind_from_string(const std::string& name);

// Number of gates per cell kind: RNN 1, LSTM 4 (i, f, o, candidate),
// GRU 3 (z, r, candidate).
int gate_count(CellKind kind);

// One gate's parameters: pre-activation = W * input + U * h_prev + b.
struct GateParams {
    Mat w;                  // n x m
    Mat u;                  // n x n
    std::vector<double> b;  // n
};

struct CellLayer {
    int in_dim = 0;  // m
    int cells = 0;   // n
    std::vector<GateParams> gates;
};

// An l-layer recurrent network with c cells per layer. Layer 1 consumes the
// scalar input (m = 1); layer j > 1 consumes the full hidden vector of layer
// j - 1 at the same timestep. The scalar prediction is the sum of the top
// layer's hidden components at the final timestep.
struct StackedNet {
    CellKind kind = CellKind::rnn;
    std::uint32_t seed = 0;
    std::vector<CellLayer> layers;

    int layer_count() const { return static_cast<int>(layers.size()); }
    int cells_per_layer() const { return layers.empty() ? 0 : layers.front().cells; }
};

// Gradient buffers mirror the parameter layout exactly.
using NetGrads = std::vector<CellLayer>;

// Weights are drawn uniformly from [-1/sqrt(fan_in), +1/sqrt(fan_in)] where
// fan_in is the gate matrix's input width; biases start at zero.
StackedNet init_net(CellKind kind, int layers, int cells, Prng& rng);

NetGrads make_grads(const StackedNet& net);
void zero_grads(NetGrads& grads);

// Closed-form parameter count: per layer with input width m and n cells,
// RNN mn + n^2 + n, LSTM 4(mn + n^2 + n), GRU 3(mn + n^2 + n).
long param_count(CellKind kind, int layers, int cells);
long param_count(const StackedNet& net);

// Per-timestep record of everything the backward pass needs.
struct StepRecord {
    std::vector<double> in;      // layer input at t
    std::vector<double> h_prev;  // hidden state entering t
    std::vector<double> h;       // hidden state leaving t
    std::vector<double> c_prev;  // LSTM cell memory entering t
    std::vector<double> c;       // LSTM cell memory leaving t
    // Gate activations. LSTM: [i, f, o, candidate]. GRU: [z, r, candidate].
    std::array<std::vector<double>, 4> gate;
};

struct ForwardTape {
    CellKind kind = CellKind::rnn;
    int q = 0;
    // steps[t][layer], t in [0, q)
    std::vector<std::vector<StepRecord>> steps;
    double output = 0.0;
};

// Single-timestep cell updates.
std::vector<double> rnn_step(const CellLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev);
std::pair<std::vector<double>, std::vector<double>> lstm_step(
    const CellLayer& layer, const std::vector<double>& x,
    const std::pair<std::vector<double>, std::vector<double>>& state_prev);
std::vector<double> gru_step(const CellLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev);

// Runs the whole stack over a scalar sequence, recording the tape.
// Returns the summed top-layer readout at the final timestep.
double forward(const StackedNet& net, const std::vector<double>& x, ForwardTape& tape);
std::pair<double, ForwardTape> forward(const StackedNet& net, const std::vector<double>& x);

// Checkpoint serialization (JSON text, schema documented in the README).
std::string save_net_json(const StackedNet& net);
StackedNet load_net_json(const std::string& text);

// Applies fn(value) to every parameter in a fixed order (layer, gate, W row
// major, U row major, b). Used by SGD, gradcheck and serialization.
template <typename Fn>
void visit_params(std::vector<CellLayer>& layers, Fn&& fn) {
    for (CellLayer& layer : layers) {
        for (GateParams& g : layer.gates) {
            for (std::size_t i = 0; i < g.w.size(); ++i) fn(g.w.data()[i]);
            for (std::size_t i = 0; i < g.u.size(); ++i) fn(g.u.data()[i]);
            for (double& v : g.b) fn(v);
        }
    }
}

template <typename Fn>
void visit_params(const std::vector<CellLayer>& layers, Fn&& fn) {
    for (const CellLayer& layer : layers) {
        for (const GateParams& g : layer.gates) {
            for (std::size_t i = 0; i < g.w.size(); ++i) fn(g.w.data()[i]);
            for (std::size_t i = 0; i < g.u.size(); ++i) fn(g.u.data()[i]);
            for (double v : g.b) fn(v);
        }
    }
}

}  // namespace memprobe
