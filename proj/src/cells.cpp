#include "memprobe/cells.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace memprobe {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out = W*in + U*h_prev + b
void gate_preact(const GateParams& g, const std::vector<double>& in,
                 const std::vector<double>& h_prev, std::vector<double>& out) {
    const int n = g.u.rows();
    const int m = g.w.cols();
    out.assign(n, 0.0);
    const double* wrow = g.w.data();
    const double* urow = g.u.data();
    for (int i = 0; i < n; ++i, wrow += m, urow += n) {
        double acc = g.b[i];
        for (int j = 0; j < m; ++j) acc += wrow[j] * in[j];
        for (int j = 0; j < n; ++j) acc += urow[j] * h_prev[j];
        out[i] = acc;
    }
}

void check_step_dims(const CellLayer& layer, const std::vector<double>& x,
                     const std::vector<double>& h_prev) {
    if (static_cast<int>(x.size()) != layer.in_dim ||
        static_cast<int>(h_prev.size()) != layer.cells)
        throw std::invalid_argument("cell step: dimension mismatch");
}

void step_rnn(const CellLayer& layer, StepRecord& rec) {
    gate_preact(layer.gates[0], rec.in, rec.h_prev, rec.h);
    for (double& v : rec.h) v = std::tanh(v);
}

void step_lstm(const CellLayer& layer, StepRecord& rec) {
    const int n = layer.cells;
    gate_preact(layer.gates[0], rec.in, rec.h_prev, rec.gate[0]);  // i
    gate_preact(layer.gates[1], rec.in, rec.h_prev, rec.gate[1]);  // f
    gate_preact(layer.gates[2], rec.in, rec.h_prev, rec.gate[2]);  // o
    gate_preact(layer.gates[3], rec.in, rec.h_prev, rec.gate[3]);  // candidate
    rec.c.resize(n);
    rec.h.resize(n);
    for (int i = 0; i < n; ++i) {
        rec.gate[0][i] = sigmoid(rec.gate[0][i]);
        rec.gate[1][i] = sigmoid(rec.gate[1][i]);
        rec.gate[2][i] = sigmoid(rec.gate[2][i]);
        rec.gate[3][i] = std::tanh(rec.gate[3][i]);
        rec.c[i] = rec.gate[1][i] * rec.c_prev[i] + rec.gate[0][i] * rec.gate[3][i];
        rec.h[i] = rec.gate[2][i] * std::tanh(rec.c[i]);
    }
}

void step_gru(const CellLayer& layer, StepRecord& rec) {
    const int n = layer.cells;
    gate_preact(layer.gates[0], rec.in, rec.h_prev, rec.gate[0]);  // z
    gate_preact(layer.gates[1], rec.in, rec.h_prev, rec.gate[1]);  // r
    for (int i = 0; i < n; ++i) {
        rec.gate[0][i] = sigmoid(rec.gate[0][i]);
        rec.gate[1][i] = sigmoid(rec.gate[1][i]);
    }
    // candidate uses r .* h_prev as its recurrent input
    std::vector<double>& rh = rec.gate[3];  // scratch, also consumed by backward
    rh.resize(n);
    for (int i = 0; i < n; ++i) rh[i] = rec.gate[1][i] * rec.h_prev[i];
    gate_preact(layer.gates[2], rec.in, rh, rec.gate[2]);
    rec.h.resize(n);
    for (int i = 0; i < n; ++i) {
        rec.gate[2][i] = std::tanh(rec.gate[2][i]);
        rec.h[i] = (1.0 - rec.gate[0][i]) * rec.h_prev[i] + rec.gate[0][i] * rec.gate[2][i];
    }
}

void step_layer(CellKind kind, const CellLayer& layer, StepRecord& rec) {
    switch (kind) {
        case CellKind::rnn: step_rnn(layer, rec); break;
        case CellKind::lstm: step_lstm(layer, rec); break;
        case CellKind::gru: step_gru(layer, rec); break;
    }
}

}  // namespace

const char* to_string(CellKind kind) {
    switch (kind) {
        case CellKind::rnn: return "rnn";
        case CellKind::lstm: return "lstm";
        case CellKind::gru: return "gru";
    }
    return "?";
}

CellKind cell_kind_from_string(const std::string& name) {
    if (name == "rnn") return CellKind::rnn;
    if (name == "lstm") return CellKind::lstm;
    if (name == "gru") return CellKind::gru;
    throw std::invalid_argument("unknown cell kind: " + name);
}

int gate_count(CellKind kind) {
    switch (kind) {
        case CellKind::rnn: return 1;
        case CellKind::lstm: return 4;
        case CellKind::gru: return 3;
    }
    return 0;
}

StackedNet init_net(CellKind kind, int layers, int cells, Prng& rng) {
    if (layers < 1 || cells < 1)
        throw std::invalid_argument("init_net: layers and cells must be >= 1");
    StackedNet net;
    net.kind = kind;
    net.seed = rng.seed();
    net.layers.resize(layers);
    for (int j = 0; j < layers; ++j) {
        CellLayer& layer = net.layers[j];
        layer.in_dim = (j == 0) ? 1 : cells;
        layer.cells = cells;
        layer.gates.resize(gate_count(kind));
        const double w_scale = 1.0 / std::sqrt(static_cast<double>(layer.in_dim));
        const double u_scale = 1.0 / std::sqrt(static_cast<double>(cells));
        for (GateParams& g : layer.gates) {
            g.w = Mat(cells, layer.in_dim);
            g.u = Mat(cells, cells);
            g.b.assign(cells, 0.0);
            for (std::size_t i = 0; i < g.w.size(); ++i)
                g.w.data()[i] = rng.uniform(-w_scale, w_scale);
            for (std::size_t i = 0; i < g.u.size(); ++i)
                g.u.data()[i] = rng.uniform(-u_scale, u_scale);
        }
    }
    return net;
}

NetGrads make_grads(const StackedNet& net) {
    NetGrads grads;
    grads.resize(net.layers.size());
    for (std::size_t j = 0; j < net.layers.size(); ++j) {
        const CellLayer& src = net.layers[j];
        CellLayer& dst = grads[j];
        dst.in_dim = src.in_dim;
        dst.cells = src.cells;
        dst.gates.resize(src.gates.size());
        for (std::size_t g = 0; g < src.gates.size(); ++g) {
            dst.gates[g].w = Mat(src.gates[g].w.rows(), src.gates[g].w.cols());
            dst.gates[g].u = Mat(src.gates[g].u.rows(), src.gates[g].u.cols());
            dst.gates[g].b.assign(src.gates[g].b.size(), 0.0);
        }
    }
    return grads;
}

void zero_grads(NetGrads& grads) {
    visit_params(grads, [](double& v) { v = 0.0; });
}

long param_count(CellKind kind, int layers, int cells) {
    const long n = cells;
    long total = 0;
    for (int j = 0; j < layers; ++j) {
        const long m = (j == 0) ? 1 : n;
        total += gate_count(kind) * (m * n + n * n + n);
    }
    return total;
}

long param_count(const StackedNet& net) {
    long total = 0;
    visit_params(net.layers, [&total](double) { ++total; });
    return total;
}

std::vector<double> rnn_step(const CellLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev) {
    check_step_dims(layer, x, h_prev);
    StepRecord rec;
    rec.in = x;
    rec.h_prev = h_prev;
    step_rnn(layer, rec);
    return rec.h;
}

std::pair<std::vector<double>, std::vector<double>> lstm_step(
    const CellLayer& layer, const std::vector<double>& x,
    const std::pair<std::vector<double>, std::vector<double>>& state_prev) {
    check_step_dims(layer, x, state_prev.first);
    if (state_prev.second.size() != state_prev.first.size())
        throw std::invalid_argument("lstm_step: h/c size mismatch");
    StepRecord rec;
    rec.in = x;
    rec.h_prev = state_prev.first;
    rec.c_prev = state_prev.second;
    step_lstm(layer, rec);
    return {rec.h, rec.c};
}

std::vector<double> gru_step(const CellLayer& layer, const std::vector<double>& x,
                             const std::vector<double>& h_prev) {
    check_step_dims(layer, x, h_prev);
    StepRecord rec;
    rec.in = x;
    rec.h_prev = h_prev;
    step_gru(layer, rec);
    return rec.h;
}

double forward(const StackedNet& net, const std::vector<double>& x, ForwardTape& tape) {
    if (x.empty()) throw std::invalid_argument("forward: empty input sequence");
    const int q = static_cast<int>(x.size());
    const int n_layers = net.layer_count();
    const int n = net.cells_per_layer();

    tape.kind = net.kind;
    tape.q = q;
    tape.steps.resize(q);

    for (int t = 0; t < q; ++t) {
        tape.steps[t].resize(n_layers);
        for (int j = 0; j < n_layers; ++j) {
            StepRecord& rec = tape.steps[t][j];
            if (j == 0)
                rec.in.assign(1, x[t]);
            else
                rec.in = tape.steps[t][j - 1].h;
            if (t == 0) {
                rec.h_prev.assign(n, 0.0);
                if (net.kind == CellKind::lstm) rec.c_prev.assign(n, 0.0);
            } else {
                rec.h_prev = tape.steps[t - 1][j].h;
                if (net.kind == CellKind::lstm) rec.c_prev = tape.steps[t - 1][j].c;
            }
            step_layer(net.kind, net.layers[j], rec);
        }
    }

    double out = 0.0;
    for (double v : tape.steps[q - 1][n_layers - 1].h) out += v;
    tape.output = out;
    return out;
}

std::pair<double, ForwardTape> forward(const StackedNet& net, const std::vector<double>& x) {
    ForwardTape tape;
    const double out = forward(net, x, tape);
    return {out, tape};
}

std::string save_net_json(const StackedNet& net) {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["kind"] = to_string(net.kind);
    doc["l"] = net.layer_count();
    doc["c"] = net.cells_per_layer();
    doc["seed"] = net.seed;
    nlohmann::json layers = nlohmann::json::array();
    for (const CellLayer& layer : net.layers) {
        nlohmann::json gates = nlohmann::json::array();
        for (const GateParams& g : layer.gates) {
            std::vector<double> flat;
            flat.reserve(g.w.size() + g.u.size() + g.b.size());
            flat.insert(flat.end(), g.w.data(), g.w.data() + g.w.size());
            flat.insert(flat.end(), g.u.data(), g.u.data() + g.u.size());
            flat.insert(flat.end(), g.b.begin(), g.b.end());
            gates.push_back(flat);
        }
        layers.push_back(gates);
    }
    doc["weights"] = layers;
    return doc.dump();
}

StackedNet load_net_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    if (doc.at("format_version").get<int>() != 1)
        throw std::runtime_error("checkpoint: unsupported format_version");
    const CellKind kind = cell_kind_from_string(doc.at("kind").get<std::string>());
    const int l = doc.at("l").get<int>();
    const int c = doc.at("c").get<int>();
    Prng scratch(doc.at("seed").get<std::uint32_t>());
    StackedNet net = init_net(kind, l, c, scratch);
    net.seed = doc.at("seed").get<std::uint32_t>();
    const nlohmann::json& layers = doc.at("weights");
    if (layers.size() != net.layers.size())
        throw std::runtime_error("checkpoint: layer count mismatch");
    for (std::size_t j = 0; j < net.layers.size(); ++j) {
        CellLayer& layer = net.layers[j];
        const nlohmann::json& gates = layers[j];
        if (gates.size() != layer.gates.size())
            throw std::runtime_error("checkpoint: gate count mismatch");
        for (std::size_t g = 0; g < layer.gates.size(); ++g) {
            GateParams& gp = layer.gates[g];
            const std::vector<double> flat = gates[g].get<std::vector<double>>();
            if (flat.size() != gp.w.size() + gp.u.size() + gp.b.size())
                throw std::runtime_error("checkpoint: weight block size mismatch");
            std::size_t k = 0;
            for (std::size_t i = 0; i < gp.w.size(); ++i) gp.w.data()[i] = flat[k++];
            for (std::size_t i = 0; i < gp.u.size(); ++i) gp.u.data()[i] = flat[k++];
            for (std::size_t i = 0; i < gp.b.size(); ++i) gp.b[i] = flat[k++];
        }
    }
    return net;
}

}  // namespace memprobe
