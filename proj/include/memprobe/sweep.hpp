#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "memprobe/cells.hpp"
#include "memprobe/tasks.hpp"
#include "memprobe/training.hpp"

namespace memprobe {

struct IntRange {
    int lo = 1;
    int hi = 1;
};

struct SweepSpec {
    std::vector<CellKind> models;
    TaskKind task = TaskKind::random_mem;
    IntRange layers{1, 1};
    IntRange cells{1, 1};
    IntRange positions{1, 1};
    std::vector<std::uint32_t> seeds;
    TrainConfig train;
    std::string output_dir;

    void validate() const;
    TaskSpec task_spec(int position) const;
};

SweepSpec sweep_spec_from_json(const std::string& text);
std::string sweep_spec_to_json(const SweepSpec& spec);

// One completed training run, one CSV row.
struct RunRecord {
    CellKind model = CellKind::rnn;
    TaskKind task = TaskKind::random_mem;
    int layers = 0;
    int cells = 0;
    int position = 0;
    std::uint32_t seed = 0;
    double lr = 0.0;
    int epochs_run = 0;
    double final_eval_mae = 0.0;
    double best_eval_mae = 0.0;
    bool diverged = false;
    double wall_ms = 0.0;
};

inline constexpr const char* kRunLogHeader =
    "model,task,layers,cells,position,seed,lr,epochs_run,final_eval_mae,best_eval_mae,"
    "diverged,wall_ms";

std::string run_record_to_csv(const RunRecord& rec);
RunRecord run_record_from_csv(const std::string& line);

// Reads a whole log; the header must match kRunLogHeader exactly, otherwise
// the file belongs to some other schema version and is rejected.
std::vector<RunRecord> read_run_log(const std::string& path);

struct GridCell {
    CellKind model = CellKind::rnn;
    int layers = 0;
    int cells = 0;
    int position = 0;
    double mean_mae = 0.0;
    double std_mae = 0.0;
    int n_runs = 0;
    int n_diverged = 0;
};

// Aggregated sweep results, canonically sorted by (model, layers, cells,
// position).
struct SweepGrid {
    std::vector<GridCell> cells;

    const GridCell* find(CellKind model, int l, int c, int p) const;
};

struct WorkItem {
    CellKind model = CellKind::rnn;
    int layers = 0;
    int cells = 0;
    int position = 0;
    std::uint32_t seed = 0;
};

// Training seed for one work item: FNV-1a over the canonical tuple string
// "<train.seed>|<task>|<model>|<l>|<c>|<p>|<seed>". Grid cells can be added
// or reordered without perturbing any existing run.
std::uint32_t derive_run_seed(const SweepSpec& spec, const WorkItem& item);

std::vector<WorkItem> full_grid(const SweepSpec& spec);

// Work not yet present in the log, in canonical grid order.
std::vector<WorkItem> resume(const SweepSpec& spec, const std::vector<RunRecord>& done);

// Mean and population standard deviation of final_eval_mae per grid cell.
SweepGrid aggregate(const std::vector<RunRecord>& records);

// Executes every missing work item, appending one row to the log file at
// log_path immediately after each run (crash loses at most the in-flight
// run). jobs > 1 trains independent items concurrently; the writer is
// serialized. Returns the aggregate over the complete log.
SweepGrid run_sweep(const SweepSpec& spec, const std::string& log_path, int jobs = 1,
                    std::ostream* progress = nullptr);

struct ModelComparison {
    struct Row {
        int layers = 0;
        int cells = 0;
        int position = 0;
        CellKind best = CellKind::rnn;
        bool tie = false;
        double best_mae = 0.0;
    };
    std::vector<Row> rows;
    // wins per model, ties excluded, same order as the input grids
    std::vector<std::pair<CellKind, int>> wins;
};

// Which model attains the lowest mean MAE per (l, c, p). All grids must
// cover the same axis points.
ModelComparison compare_models(const std::vector<std::pair<CellKind, SweepGrid>>& grids);

}  // namespace memprobe
