#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memprobe/cells.hpp"
#include "memprobe/tasks.hpp"

namespace memprobe {

struct TrainConfig {
    double learning_rate = 0.05;
    int episodes_per_epoch = 100;
    int max_epochs = 5000;
    int eval_episodes = 1000;
    int eval_every = 10;
    double early_stop_mae = 0.01;
    std::uint32_t seed = 0;
    // 0 = full backpropagation through time; > 0 limits how many timesteps
    // gradients flow back from the end of the sequence.
    int bptt_truncate = 0;

    void validate() const;
};

struct TrainResult {
    std::vector<std::pair<int, double>> loss_curve;  // (epoch, eval MAE)
    double final_eval_mae = 0.0;
    double best_eval_mae = 0.0;
    int epochs_run = 0;
    double wall_ms = 0.0;
    bool diverged = false;
};

// d|target - pred| / d pred = -sign(target - pred), with sign(0) := 0.
double loss_grad(double pred, double target);

// theta <- theta - lr * g. Returns false when a non-finite gradient is seen;
// the caller marks the run diverged.
bool sgd_step(StackedNet& net, const NetGrads& grads, double lr);

// Exact gradients of the scalar output w.r.t. every parameter, accumulated
// backward over the whole tape. Overwrites `grads`.
void backward(const StackedNet& net, const ForwardTape& tape, double d_output,
              NetGrads& grads, int truncate = 0);

// Reusable-buffer version for the training loop.
class BpttWorkspace {
public:
    void run(const StackedNet& net, const ForwardTape& tape, double d_output,
             NetGrads& grads, int truncate = 0);

private:
    std::vector<std::vector<double>> dh_carry_;
    std::vector<std::vector<double>> dc_carry_;
    std::vector<double> dh_, da_, dc_, scratch_;
    std::vector<double> dz_[4];
};

TrainResult train_run(CellKind kind, int layers, int cells, const TaskSpec& task,
                      const TrainConfig& config);

// Mean eval MAE of a trained net over fresh episodes.
double evaluate(const StackedNet& net, const TaskSpec& task, int episodes, Prng& rng);

struct GradCheckReport {
    struct Block {
        std::string name;
        double max_rel_err;
    };
    std::vector<Block> blocks;
    double max_rel_err = 0.0;
};

// Central finite differences (h = 1e-5) of the full loss on one fixed
// episode vs the analytic BPTT gradients.
GradCheckReport gradcheck(CellKind kind, int layers, int cells, int q, std::uint32_t seed);

}  // namespace memprobe
