#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memprobe/prng.hpp"

namespace memprobe {

enum class TaskKind { random_mem, fixed_mem, correlated_mem };

const char* to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

// A memorization task: reproduce the pth-from-last element of a sequence of
// length q in [q_min, q_max]. The fixed-length task pins q = 10.
struct TaskSpec {
    TaskKind kind = TaskKind::random_mem;
    int q_min = 10;
    int q_max = 15;
    int position = 1;  // p >= 1, p <= q_min so the target always exists

    static TaskSpec random_mem(int position, int q_min = 10, int q_max = 15);
    static TaskSpec fixed_mem(int position);
    static TaskSpec correlated_mem(int position, int q_min = 10, int q_max = 15);

    void validate() const;
};

struct Episode {
    std::vector<double> x;
    int q = 0;
    int p = 0;
    double target = 0.0;
};

// Sampling order is fixed: q first, then x_1..x_q (or y_1..y_q for the
// correlated task), so a seed maps to the same episode everywhere.
Episode gen_random(const TaskSpec& spec, Prng& rng);
Episode gen_fixed(const TaskSpec& spec, Prng& rng);
Episode gen_correlated(const TaskSpec& spec, Prng& rng);
Episode gen_episode(const TaskSpec& spec, Prng& rng);

double mae(double pred, double target);

// Mean |target - 0.5| over fresh episodes: the fixed-guess reference loss.
double baseline_mae(const TaskSpec& spec, int episodes, Prng& rng);

// Same, with an injected episode source (used by tests).
template <typename Gen>
double baseline_mae_with(Gen&& gen, int episodes, Prng& rng) {
    double total = 0.0;
    for (int i = 0; i < episodes; ++i) total += mae(0.5, gen(rng).target);
    return total / episodes;
}

// CSV rows: episode_id,q,p,target,x_1,...,x_q (ragged tail).
void dump_episodes_csv(std::ostream& out, const TaskSpec& spec, int count, Prng& rng);

}  // namespace memprobe
