#include "memprobe/tasks.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "memprobe/csvio.hpp"

namespace memprobe {

const char* to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::random_mem: return "random";
        case TaskKind::fixed_mem: return "fixed";
        case TaskKind::correlated_mem: return "correlated";
    }
    return "?";
}

TaskKind task_kind_from_string(const std::string& name) {
    if (name == "random") return TaskKind::random_mem;
    if (name == "fixed") return TaskKind::fixed_mem;
    if (name == "correlated") return TaskKind::correlated_mem;
    throw std::invalid_argument("unknown task kind: " + name);
}

TaskSpec TaskSpec::random_mem(int position, int q_min, int q_max) {
    TaskSpec spec{TaskKind::random_mem, q_min, q_max, position};
    spec.validate();
    return spec;
}

TaskSpec TaskSpec::fixed_mem(int position) {
    TaskSpec spec{TaskKind::fixed_mem, 10, 10, position};
    spec.validate();
    return spec;
}

TaskSpec TaskSpec::correlated_mem(int position, int q_min, int q_max) {
    TaskSpec spec{TaskKind::correlated_mem, q_min, q_max, position};
    spec.validate();
    return spec;
}

void TaskSpec::validate() const {
    if (q_min < 10 || q_min > q_max)
        throw std::invalid_argument("TaskSpec: requires 10 <= q_min <= q_max");
    if (kind == TaskKind::fixed_mem && (q_min != 10 || q_max != 10))
        throw std::invalid_argument("TaskSpec: fixed task pins q = 10");
    if (position < 1 || position > q_min)
        throw std::invalid_argument("TaskSpec: requires 1 <= p <= q_min");
}

namespace {

int draw_length(const TaskSpec& spec, Prng& rng) {
    if (spec.q_min == spec.q_max) return spec.q_min;
    return rng.uniform_int(spec.q_min, spec.q_max);
}

Episode finish(const TaskSpec& spec, std::vector<double> x) {
    Episode ep;
    ep.q = static_cast<int>(x.size());
    ep.p = spec.position;
    ep.target = x[ep.q - spec.position];  // x_{q+1-p}, 1-indexed
    ep.x = std::move(x);
    return ep;
}

}  // namespace

Episode gen_random(const TaskSpec& spec, Prng& rng) {
    if (spec.kind != TaskKind::random_mem)
        throw std::invalid_argument("gen_random: wrong task kind");
    spec.validate();
    const int q = draw_length(spec, rng);
    std::vector<double> x(q);
    for (double& v : x) v = rng.uniform(0.0, 1.0);
    return finish(spec, std::move(x));
}

Episode gen_fixed(const TaskSpec& spec, Prng& rng) {
    if (spec.kind != TaskKind::fixed_mem)
        throw std::invalid_argument("gen_fixed: wrong task kind");
    spec.validate();
    std::vector<double> x(10);
    for (double& v : x) v = rng.uniform(0.0, 1.0);
    return finish(spec, std::move(x));
}

Episode gen_correlated(const TaskSpec& spec, Prng& rng) {
    if (spec.kind != TaskKind::correlated_mem)
        throw std::invalid_argument("gen_correlated: wrong task kind");
    spec.validate();
    const int q = draw_length(spec, rng);
    // x_1 = y_1; x_i = alpha_i * x_{i-1} + (1 - alpha_i) * y_i, alpha_i = i/q.
    std::vector<double> x(q);
    x[0] = rng.uniform(0.0, 1.0);
    for (int i = 2; i <= q; ++i) {
        const double y = rng.uniform(0.0, 1.0);
        const double alpha = static_cast<double>(i) / q;
        x[i - 1] = alpha * x[i - 2] + (1.0 - alpha) * y;
    }
    return finish(spec, std::move(x));
}

Episode gen_episode(const TaskSpec& spec, Prng& rng) {
    switch (spec.kind) {
        case TaskKind::random_mem: return gen_random(spec, rng);
        case TaskKind::fixed_mem: return gen_fixed(spec, rng);
        case TaskKind::correlated_mem: return gen_correlated(spec, rng);
    }
    throw std::invalid_argument("gen_episode: bad task kind");
}

double mae(double pred, double target) { return std::fabs(target - pred); }

double baseline_mae(const TaskSpec& spec, int episodes, Prng& rng) {
    if (episodes < 1) throw std::invalid_argument("baseline_mae: episodes >= 1");
    return baseline_mae_with([&spec](Prng& r) { return gen_episode(spec, r); }, episodes, rng);
}

void dump_episodes_csv(std::ostream& out, const TaskSpec& spec, int count, Prng& rng) {
    out << "episode_id,q,p,target";
    for (int i = 1; i <= spec.q_max; ++i) out << ",x_" << i;
    out << '\n';
    for (int id = 0; id < count; ++id) {
        const Episode ep = gen_episode(spec, rng);
        out << id << ',' << ep.q << ',' << ep.p << ',' << fmt_double(ep.target);
        for (double v : ep.x) out << ',' << fmt_double(v);
        out << '\n';
    }
}

}  // namespace memprobe
