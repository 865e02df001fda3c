// Times the two OpenMP-distributed kernels against their serial reference
// path (jobs = 1) on identical workloads and verifies both produce the same
// bytes. Usage: bench_parallel [jobs] [quick|full]
//
// The serial path is not a separate implementation: jobs = 1 routes around
// the parallel regions, so this doubles as the equivalence check the unit
// tests run at smaller sizes.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "memprobe/esn.hpp"
#include "memprobe/report.hpp"
#include "memprobe/sweep.hpp"

using namespace memprobe;
namespace fs = std::filesystem;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Rows are appended in completion order, which jobs > 1 does not fix; the
// comparison is over the sorted set with wall time masked.
std::string masked_log(const std::string& path) {
    std::vector<std::string> rows;
    for (RunRecord rec : read_run_log(path)) {
        rec.wall_ms = 0.0;
        rows.push_back(run_record_to_csv(rec));
    }
    std::sort(rows.begin(), rows.end());
    std::string all;
    for (const std::string& row : rows) all += row + "\n";
    return all;
}

struct Row {
    const char* kernel;
    double serial_s = 0.0;
    double parallel_s = 0.0;
    bool identical = false;
};

Row bench_sweep(int jobs, bool quick) {
    SweepSpec spec;
    spec.models = {CellKind::rnn};
    spec.task = TaskKind::random_mem;
    spec.layers = {1, 1};
    spec.cells = quick ? IntRange{1, 2} : IntRange{1, 4};
    spec.positions = quick ? IntRange{1, 2} : IntRange{1, 4};
    spec.seeds = {0, 1};
    spec.train.learning_rate = 0.01;
    spec.train.episodes_per_epoch = 50;
    spec.train.max_epochs = quick ? 40 : 600;
    spec.train.eval_episodes = 200;
    spec.train.eval_every = 20;
    spec.train.early_stop_mae = 0.0;  // fixed workload: every run does max_epochs
    spec.train.seed = 7;

    const fs::path dir = fs::temp_directory_path() / "memprobe_bench_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string log_serial = (dir / "serial.csv").string();
    const std::string log_parallel = (dir / "parallel.csv").string();

    Row row{"sweep grid"};
    double t = now_s();
    const SweepGrid serial = run_sweep(spec, log_serial, 1);
    row.serial_s = now_s() - t;
    t = now_s();
    const SweepGrid parallel = run_sweep(spec, log_parallel, jobs);
    row.parallel_s = now_s() - t;

    row.identical = export_csv(serial) == export_csv(parallel) &&
                    masked_log(log_serial) == masked_log(log_parallel);
    fs::remove_all(dir);
    return row;
}

Row bench_mc(int jobs, bool quick) {
    EsnConfig config;
    config.neurons = quick ? 20 : 80;
    config.connectivity = quick ? 0.2 : 0.05;
    config.stream_len = quick ? 400 : 3000;
    config.max_delay = quick ? 20 : 160;
    config.seed = 1;

    Row row{"memory capacity"};
    double t = now_s();
    const McResult serial = memory_capacity(config, 1);
    row.serial_s = now_s() - t;
    t = now_s();
    const McResult parallel = memory_capacity(config, jobs);
    row.parallel_s = now_s() - t;

    row.identical = serial.total == parallel.total && serial.mc_k == parallel.mc_k;
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    const int jobs = argc > 1 ? std::atoi(argv[1]) : 4;
    const bool quick = argc > 2 && std::strcmp(argv[2], "quick") == 0;
    if (jobs < 2) {
        std::fprintf(stderr, "need jobs >= 2 to compare against the serial path\n");
        return 1;
    }

    std::printf("workload: %s, parallel jobs: %d\n\n", quick ? "quick" : "full", jobs);
    std::printf("%-18s %10s %12s %9s   %s\n", "kernel", "serial", "parallel", "speedup",
                "outputs");

    bool all_identical = true;
    for (const Row& row : {bench_sweep(jobs, quick), bench_mc(jobs, quick)}) {
        std::printf("%-18s %9.2fs %11.2fs %8.2fx   %s\n", row.kernel, row.serial_s,
                    row.parallel_s, row.serial_s / row.parallel_s,
                    row.identical ? "identical" : "DIFFER");
        all_identical = all_identical && row.identical;
    }

    if (!all_identical) {
        std::fprintf(stderr, "\nparallel output differs from the serial reference\n");
        return 1;
    }
    return 0;
}
