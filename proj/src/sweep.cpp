#include "memprobe/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "memprobe/csvio.hpp"

namespace memprobe {

void SweepSpec::validate() const {
    if (models.empty()) throw std::invalid_argument("SweepSpec: no models");
    std::set<CellKind> uniq(models.begin(), models.end());
    if (uniq.size() != models.size())
        throw std::invalid_argument("SweepSpec: duplicate models");
    for (const IntRange& r : {layers, cells, positions})
        if (r.lo < 1 || r.lo > r.hi)
            throw std::invalid_argument("SweepSpec: ranges need 1 <= lo <= hi");
    if (seeds.empty()) throw std::invalid_argument("SweepSpec: no seeds");
    std::set<std::uint32_t> seed_set(seeds.begin(), seeds.end());
    if (seed_set.size() != seeds.size())
        throw std::invalid_argument("SweepSpec: duplicate seeds");
    train.validate();
    task_spec(positions.hi);  // positions must fit the task's minimum length
}

TaskSpec SweepSpec::task_spec(int position) const {
    switch (task) {
        case TaskKind::random_mem: return TaskSpec::random_mem(position);
        case TaskKind::fixed_mem: return TaskSpec::fixed_mem(position);
        case TaskKind::correlated_mem: return TaskSpec::correlated_mem(position);
    }
    throw std::invalid_argument("SweepSpec: bad task kind");
}

namespace {

void require_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                  const char* where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument(std::string("sweep spec: unknown key '") + key +
                                        "' in " + where);
}

IntRange range_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument(std::string("sweep spec: '") + name + "' must be [lo, hi]");
    return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

SweepSpec sweep_spec_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    require_keys(doc, {"models", "task", "layers", "cells", "positions", "seeds", "train",
                       "output_dir"},
                 "spec");

    SweepSpec spec;
    for (const auto& m : doc.at("models"))
        spec.models.push_back(cell_kind_from_string(m.get<std::string>()));
    spec.task = task_kind_from_string(doc.at("task").get<std::string>());
    spec.layers = range_from_json(doc.at("layers"), "layers");
    spec.cells = range_from_json(doc.at("cells"), "cells");
    spec.positions = range_from_json(doc.at("positions"), "positions");
    for (const auto& s : doc.at("seeds")) spec.seeds.push_back(s.get<std::uint32_t>());
    if (doc.contains("output_dir")) spec.output_dir = doc["output_dir"].get<std::string>();

    if (doc.contains("train")) {
        const nlohmann::json& t = doc["train"];
        require_keys(t, {"learning_rate", "episodes_per_epoch", "max_epochs", "eval_episodes",
                         "eval_every", "early_stop_mae", "seed", "bptt_truncate"},
                     "train");
        if (t.contains("learning_rate")) spec.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("episodes_per_epoch"))
            spec.train.episodes_per_epoch = t["episodes_per_epoch"].get<int>();
        if (t.contains("max_epochs")) spec.train.max_epochs = t["max_epochs"].get<int>();
        if (t.contains("eval_episodes")) spec.train.eval_episodes = t["eval_episodes"].get<int>();
        if (t.contains("eval_every")) spec.train.eval_every = t["eval_every"].get<int>();
        if (t.contains("early_stop_mae")) spec.train.early_stop_mae = t["early_stop_mae"].get<double>();
        if (t.contains("seed")) spec.train.seed = t["seed"].get<std::uint32_t>();
        if (t.contains("bptt_truncate")) spec.train.bptt_truncate = t["bptt_truncate"].get<int>();
    }
    spec.validate();
    return spec;
}

std::string sweep_spec_to_json(const SweepSpec& spec) {
    nlohmann::json doc;
    doc["models"] = nlohmann::json::array();
    for (CellKind m : spec.models) doc["models"].push_back(to_string(m));
    doc["task"] = to_string(spec.task);
    doc["layers"] = {spec.layers.lo, spec.layers.hi};
    doc["cells"] = {spec.cells.lo, spec.cells.hi};
    doc["positions"] = {spec.positions.lo, spec.positions.hi};
    doc["seeds"] = spec.seeds;
    doc["train"] = {{"learning_rate", spec.train.learning_rate},
                    {"episodes_per_epoch", spec.train.episodes_per_epoch},
                    {"max_epochs", spec.train.max_epochs},
                    {"eval_episodes", spec.train.eval_episodes},
                    {"eval_every", spec.train.eval_every},
                    {"early_stop_mae", spec.train.early_stop_mae},
                    {"seed", spec.train.seed},
                    {"bptt_truncate", spec.train.bptt_truncate}};
    if (!spec.output_dir.empty()) doc["output_dir"] = spec.output_dir;
    return doc.dump(2);
}

std::string run_record_to_csv(const RunRecord& rec) {
    std::string line;
    line += to_string(rec.model);
    line += ',';
    line += to_string(rec.task);
    line += ',';
    line += std::to_string(rec.layers) + ',' + std::to_string(rec.cells) + ',' +
            std::to_string(rec.position) + ',' + std::to_string(rec.seed) + ',';
    line += fmt_double(rec.lr) + ',' + std::to_string(rec.epochs_run) + ',';
    line += fmt_double(rec.final_eval_mae) + ',' + fmt_double(rec.best_eval_mae) + ',';
    line += rec.diverged ? "1," : "0,";
    line += fmt_double(rec.wall_ms);
    return line;
}

RunRecord run_record_from_csv(const std::string& line) {
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 12)
        throw std::invalid_argument("run record: expected 12 fields, got " +
                                    std::to_string(f.size()));
    RunRecord rec;
    rec.model = cell_kind_from_string(f[0]);
    rec.task = task_kind_from_string(f[1]);
    rec.layers = std::stoi(f[2]);
    rec.cells = std::stoi(f[3]);
    rec.position = std::stoi(f[4]);
    rec.seed = static_cast<std::uint32_t>(std::stoul(f[5]));
    rec.lr = parse_double(f[6]);
    rec.epochs_run = std::stoi(f[7]);
    rec.final_eval_mae = parse_double(f[8]);
    rec.best_eval_mae = parse_double(f[9]);
    if (f[10] != "0" && f[10] != "1")
        throw std::invalid_argument("run record: diverged flag must be 0 or 1");
    rec.diverged = f[10] == "1";
    rec.wall_ms = parse_double(f[11]);
    return rec;
}

std::vector<RunRecord> read_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run log: " + path);
    std::string line;
    if (!std::getline(in, line)) return {};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRunLogHeader)
        throw std::runtime_error("run log header mismatch (other schema version?): " + path);
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(run_record_from_csv(line));
    }
    return records;
}

const GridCell* SweepGrid::find(CellKind model, int l, int c, int p) const {
    for (const GridCell& cell : cells)
        if (cell.model == model && cell.layers == l && cell.cells == c && cell.position == p)
            return &cell;
    return nullptr;
}

std::uint32_t derive_run_seed(const SweepSpec& spec, const WorkItem& item) {
    std::string key = std::to_string(spec.train.seed);
    key += '|';
    key += to_string(spec.task);
    key += '|';
    key += to_string(item.model);
    key += '|';
    key += std::to_string(item.layers) + '|' + std::to_string(item.cells) + '|' +
           std::to_string(item.position) + '|' + std::to_string(item.seed);
    return derive_seed(key);
}

std::vector<WorkItem> full_grid(const SweepSpec& spec) {
    std::vector<WorkItem> items;
    for (CellKind model : spec.models)
        for (int l = spec.layers.lo; l <= spec.layers.hi; ++l)
            for (int c = spec.cells.lo; c <= spec.cells.hi; ++c)
                for (int p = spec.positions.lo; p <= spec.positions.hi; ++p)
                    for (std::uint32_t s : spec.seeds) items.push_back({model, l, c, p, s});
    return items;
}

std::vector<WorkItem> resume(const SweepSpec& spec, const std::vector<RunRecord>& done) {
    std::set<std::tuple<CellKind, int, int, int, std::uint32_t>> have;
    for (const RunRecord& rec : done)
        if (rec.task == spec.task)
            have.insert({rec.model, rec.layers, rec.cells, rec.position, rec.seed});

    std::vector<WorkItem> remaining;
    for (const WorkItem& item : full_grid(spec))
        if (!have.count({item.model, item.layers, item.cells, item.position, item.seed}))
            remaining.push_back(item);
    return remaining;
}

SweepGrid aggregate(const std::vector<RunRecord>& records) {
    std::map<std::tuple<int, int, int, int>, std::vector<const RunRecord*>> groups;
    for (const RunRecord& rec : records)
        groups[{static_cast<int>(rec.model), rec.layers, rec.cells, rec.position}].push_back(&rec);

    SweepGrid grid;
    for (const auto& [key, recs] : groups) {
        GridCell cell;
        cell.model = static_cast<CellKind>(std::get<0>(key));
        cell.layers = std::get<1>(key);
        cell.cells = std::get<2>(key);
        cell.position = std::get<3>(key);
        cell.n_runs = static_cast<int>(recs.size());
        double mean = 0.0;
        for (const RunRecord* r : recs) {
            mean += r->final_eval_mae;
            cell.n_diverged += r->diverged ? 1 : 0;
        }
        mean /= cell.n_runs;
        double var = 0.0;
        for (const RunRecord* r : recs) {
            const double d = r->final_eval_mae - mean;
            var += d * d;
        }
        cell.mean_mae = mean;
        cell.std_mae = std::sqrt(var / cell.n_runs);
        grid.cells.push_back(cell);
    }
    return grid;  // map iteration order is already the canonical sort
}

SweepGrid run_sweep(const SweepSpec& spec, const std::string& log_path, int jobs,
                    std::ostream* progress) {
    spec.validate();
    if (jobs < 1) jobs = 1;

    std::vector<RunRecord> existing;
    if (std::filesystem::exists(log_path)) existing = read_run_log(log_path);

    const std::vector<WorkItem> todo = resume(spec, existing);

    if (!todo.empty()) {
        const bool fresh = !std::filesystem::exists(log_path) ||
                           std::filesystem::file_size(log_path) == 0;
        std::ofstream out(log_path, std::ios::app);
        if (!out) throw std::runtime_error("cannot append to run log: " + log_path);
        if (fresh) {
            out << kRunLogHeader << '\n';
            out.flush();
        }

        bool failed = false;
        std::string error;
        int completed = 0;

#pragma omp parallel for schedule(dynamic) if (jobs > 1) num_threads(jobs)
        for (std::size_t i = 0; i < todo.size(); ++i) {
            try {
                const WorkItem& item = todo[i];
                TrainConfig cfg = spec.train;
                cfg.seed = derive_run_seed(spec, item);
                const TaskSpec task = spec.task_spec(item.position);
                const TrainResult res =
                    train_run(item.model, item.layers, item.cells, task, cfg);

                RunRecord rec;
                rec.model = item.model;
                rec.task = spec.task;
                rec.layers = item.layers;
                rec.cells = item.cells;
                rec.position = item.position;
                rec.seed = item.seed;
                rec.lr = cfg.learning_rate;
                rec.epochs_run = res.epochs_run;
                rec.final_eval_mae = res.final_eval_mae;
                rec.best_eval_mae = res.best_eval_mae;
                rec.diverged = res.diverged;
                rec.wall_ms = res.wall_ms;

#pragma omp critical(memprobe_sweep_log)
                {
                    out << run_record_to_csv(rec) << '\n';
                    out.flush();
                    ++completed;
                    if (progress)
                        *progress << "[" << completed << "/" << todo.size() << "] "
                                  << run_record_to_csv(rec) << "\n";
                }
            } catch (const std::exception& e) {
#pragma omp critical(memprobe_sweep_err)
                {
                    failed = true;
                    error = e.what();
                }
            }
        }
        if (failed) throw std::runtime_error(std::string("run_sweep: ") + error);
    }

    // the log file is the single source of truth for aggregation
    std::vector<RunRecord> all = read_run_log(log_path);
    std::vector<RunRecord> matching;
    for (const RunRecord& rec : all)
        if (rec.task == spec.task) matching.push_back(rec);
    return aggregate(matching);
}

ModelComparison compare_models(const std::vector<std::pair<CellKind, SweepGrid>>& grids) {
    if (grids.empty()) throw std::invalid_argument("compare_models: no grids");

    using Axis = std::tuple<int, int, int>;
    std::set<Axis> axes;
    for (const GridCell& cell : grids.front().second.cells)
        axes.insert({cell.layers, cell.cells, cell.position});
    for (const auto& [model, grid] : grids) {
        std::set<Axis> other;
        for (const GridCell& cell : grid.cells)
            other.insert({cell.layers, cell.cells, cell.position});
        if (other != axes)
            throw std::invalid_argument("compare_models: grids cover different axes");
    }

    ModelComparison cmp;
    for (const auto& [model, grid] : grids) cmp.wins.emplace_back(model, 0);

    for (const Axis& axis : axes) {
        const auto [l, c, p] = axis;
        ModelComparison::Row row;
        row.layers = l;
        row.cells = c;
        row.position = p;
        double best = 0.0;
        bool first = true;
        int best_idx = -1;
        int best_count = 0;
        for (std::size_t gi = 0; gi < grids.size(); ++gi) {
            const GridCell* cell = grids[gi].second.find(grids[gi].first, l, c, p);
            if (!cell) throw std::invalid_argument("compare_models: missing cell");
            if (first || cell->mean_mae < best) {
                best = cell->mean_mae;
                best_idx = static_cast<int>(gi);
                best_count = 1;
                first = false;
            } else if (cell->mean_mae == best) {
                ++best_count;
            }
        }
        row.best = grids[best_idx].first;
        row.best_mae = best;
        row.tie = best_count > 1;
        if (!row.tie) ++cmp.wins[best_idx].second;
        cmp.rows.push_back(row);
    }
    return cmp;
}

}  // namespace memprobe
