// Single entry point for the lab: gradient checks, single training runs,
// sweep grids, report rendering, ESN memory capacity and the fixed-guess
// baseline. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memprobe/csvio.hpp"
#include "memprobe/esn.hpp"
#include "memprobe/report.hpp"
#include "memprobe/sweep.hpp"
#include "memprobe/tasks.hpp"
#include "memprobe/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --out flag beats MEMPROBE_OUT beats the working directory.
std::string resolve_out(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("MEMPROBE_OUT"); env && *env) return env;
    return ".";
}

void write_file(const std::string& path, const std::string& content) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
    std::cout << "wrote " << path << "\n";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void echo_config(const json& doc) { std::cout << "config " << doc.dump() << "\n"; }

memprobe::TaskSpec make_task(const std::string& task, int position, int q_min, int q_max) {
    const memprobe::TaskKind kind = memprobe::task_kind_from_string(task);
    memprobe::TaskSpec spec;
    spec.kind = kind;
    spec.position = position;
    if (kind == memprobe::TaskKind::fixed_mem) {
        spec.q_min = spec.q_max = 10;
    } else {
        spec.q_min = q_min;
        spec.q_max = q_max;
    }
    spec.validate();
    return spec;
}

json train_json(const memprobe::TrainConfig& t) {
    return json{{"learning_rate", t.learning_rate},
                {"episodes_per_epoch", t.episodes_per_epoch},
                {"max_epochs", t.max_epochs},
                {"eval_episodes", t.eval_episodes},
                {"eval_every", t.eval_every},
                {"early_stop_mae", t.early_stop_mae},
                {"seed", t.seed},
                {"bptt_truncate", t.bptt_truncate}};
}

struct GradcheckArgs {
    std::string model = "rnn";
    int layers = 1;
    int cells = 3;
    int q = 10;
    std::uint32_t seed = 0;
    double tol = 1e-4;
};

int run_gradcheck(const GradcheckArgs& a) {
    echo_config(json{{"command", "gradcheck"},
                     {"model", a.model},
                     {"layers", a.layers},
                     {"cells", a.cells},
                     {"q", a.q},
                     {"seed", a.seed},
                     {"tol", a.tol}});
    const memprobe::CellKind kind = memprobe::cell_kind_from_string(a.model);
    const memprobe::GradCheckReport report =
        memprobe::gradcheck(kind, a.layers, a.cells, a.q, a.seed);
    for (const auto& block : report.blocks)
        std::cout << "  " << block.name << " max_rel_err "
                  << memprobe::fmt_double(block.max_rel_err) << "\n";
    std::cout << "max_rel_err " << memprobe::fmt_double(report.max_rel_err) << "\n";
    if (!(report.max_rel_err < a.tol)) {
        std::cerr << "gradient check failed: " << memprobe::fmt_double(report.max_rel_err)
                  << " >= " << memprobe::fmt_double(a.tol) << "\n";
        return 2;
    }
    return 0;
}

struct TrainArgs {
    std::string model = "rnn";
    int layers = 1;
    int cells = 5;
    std::string task = "random";
    int position = 1;
    int q_min = 10;
    int q_max = 15;
    memprobe::TrainConfig train;
    std::string out;
    bool svg = false;
};

int run_train(const TrainArgs& a) {
    const std::string out_dir = resolve_out(a.out);
    echo_config(json{{"command", "train"},
                     {"model", a.model},
                     {"layers", a.layers},
                     {"cells", a.cells},
                     {"task", a.task},
                     {"position", a.position},
                     {"q_min", a.q_min},
                     {"q_max", a.q_max},
                     {"train", train_json(a.train)},
                     {"out", out_dir}});
    const memprobe::TaskSpec task = make_task(a.task, a.position, a.q_min, a.q_max);
    const memprobe::CellKind kind = memprobe::cell_kind_from_string(a.model);
    a.train.validate();
    const memprobe::TrainResult res =
        memprobe::train_run(kind, a.layers, a.cells, task, a.train);

    std::string curve = "epoch,eval_mae\n";
    for (const auto& [epoch, mae] : res.loss_curve)
        curve += std::to_string(epoch) + "," + memprobe::fmt_double(mae) + "\n";
    const std::string stem = a.task + "_" + a.model + "_l" + std::to_string(a.layers) + "_c" +
                             std::to_string(a.cells) + "_p" + std::to_string(a.position) + "_s" +
                             std::to_string(a.train.seed);
    write_file(out_dir + "/curve_" + stem + ".csv", curve);
    if (a.svg) {
        memprobe::TaggedCurve tagged;
        tagged.position = a.position;
        tagged.result = res;
        write_file(out_dir + "/" + stem + "_losscurves.svg", memprobe::losscurves_svg({tagged}));
    }

    std::cout << "result " << json{{"final_eval_mae", res.final_eval_mae},
                                   {"best_eval_mae", res.best_eval_mae},
                                   {"epochs_run", res.epochs_run},
                                   {"diverged", res.diverged},
                                   {"wall_ms", res.wall_ms}}
                                .dump()
              << "\n";
    return 0;
}

struct SweepArgs {
    std::string config;
    std::vector<std::string> models;
    std::string task;
    std::vector<int> layers, cells, positions;
    std::vector<std::uint32_t> seeds;
    memprobe::TrainConfig train;
    std::string out;
    int jobs = 1;
    // which optional overrides were actually given on the command line
    CLI::Option *o_models = nullptr, *o_task = nullptr, *o_layers = nullptr, *o_cells = nullptr,
                *o_positions = nullptr, *o_seeds = nullptr, *o_lr = nullptr, *o_epe = nullptr,
                *o_max_epochs = nullptr, *o_eval_eps = nullptr, *o_eval_every = nullptr,
                *o_early = nullptr, *o_train_seed = nullptr, *o_bptt = nullptr, *o_out = nullptr;
};

int run_sweep_cmd(const SweepArgs& a) {
    memprobe::SweepSpec spec;
    if (!a.config.empty()) spec = memprobe::sweep_spec_from_json(slurp(a.config));

    if (a.o_models->count()) {
        spec.models.clear();
        for (const std::string& m : a.models)
            spec.models.push_back(memprobe::cell_kind_from_string(m));
    }
    if (a.o_task->count()) spec.task = memprobe::task_kind_from_string(a.task);
    if (a.o_layers->count()) spec.layers = {a.layers[0], a.layers[1]};
    if (a.o_cells->count()) spec.cells = {a.cells[0], a.cells[1]};
    if (a.o_positions->count()) spec.positions = {a.positions[0], a.positions[1]};
    if (a.o_seeds->count()) spec.seeds = a.seeds;
    if (a.o_lr->count()) spec.train.learning_rate = a.train.learning_rate;
    if (a.o_epe->count()) spec.train.episodes_per_epoch = a.train.episodes_per_epoch;
    if (a.o_max_epochs->count()) spec.train.max_epochs = a.train.max_epochs;
    if (a.o_eval_eps->count()) spec.train.eval_episodes = a.train.eval_episodes;
    if (a.o_eval_every->count()) spec.train.eval_every = a.train.eval_every;
    if (a.o_early->count()) spec.train.early_stop_mae = a.train.early_stop_mae;
    if (a.o_train_seed->count()) spec.train.seed = a.train.seed;
    if (a.o_bptt->count()) spec.train.bptt_truncate = a.train.bptt_truncate;
    if (a.o_out->count()) spec.output_dir = a.out;
    if (spec.output_dir.empty()) spec.output_dir = resolve_out("");
    spec.validate();

    const std::string task_name = memprobe::to_string(spec.task);
    const std::string log_path = spec.output_dir + "/runs_" + task_name + ".csv";
    std::cout << "config " << memprobe::sweep_spec_to_json(spec) << "\n";
    std::cout << "jobs " << a.jobs << "\nlog " << log_path << "\n";

    fs::create_directories(spec.output_dir);
    const memprobe::SweepGrid grid = memprobe::run_sweep(spec, log_path, a.jobs, &std::cout);
    write_file(spec.output_dir + "/grid_" + task_name + ".csv", memprobe::export_csv(grid));
    std::cout << "runs " << memprobe::full_grid(spec).size() << " cells " << grid.cells.size()
              << "\n";
    return 0;
}

struct ReportArgs {
    std::string in;
    std::string out;
    std::vector<std::string> logs;
    double loss_cap = 0.25;
    double threshold = 0.05;
};

int run_report(const ReportArgs& a) {
    const std::string in_dir = resolve_out(a.in);
    const std::string out_dir = a.out.empty() ? in_dir : a.out;

    std::vector<std::string> logs = a.logs;
    if (logs.empty()) {
        for (const fs::directory_entry& entry : fs::directory_iterator(in_dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.rfind("runs", 0) == 0 && entry.path().extension() == ".csv")
                logs.push_back(entry.path().string());
        }
        std::sort(logs.begin(), logs.end());
    }
    echo_config(json{{"command", "report"},
                     {"in", in_dir},
                     {"out", out_dir},
                     {"logs", logs},
                     {"loss_cap", a.loss_cap},
                     {"threshold", a.threshold}});
    if (logs.empty()) throw std::runtime_error("no run logs (runs*.csv) found in " + in_dir);

    std::map<memprobe::TaskKind, std::vector<memprobe::RunRecord>> by_task;
    for (const std::string& log : logs)
        for (const memprobe::RunRecord& rec : memprobe::read_run_log(log))
            by_task[rec.task].push_back(rec);

    memprobe::HeatmapStyle style;
    style.loss_cap = a.loss_cap;

    for (const auto& [task, records] : by_task) {
        const std::string task_name = memprobe::to_string(task);
        const memprobe::SweepGrid grid = memprobe::aggregate(records);
        write_file(out_dir + "/grid_" + task_name + ".csv", memprobe::export_csv(grid));

        std::map<memprobe::CellKind, memprobe::SweepGrid> by_model;
        for (const memprobe::GridCell& cell : grid.cells) by_model[cell.model].cells.push_back(cell);
        for (const auto& [model, sub] : by_model)
            write_file(out_dir + "/" + task_name + "_" + memprobe::to_string(model) +
                           "_heatmap.svg",
                       memprobe::heatmap_svg(sub, style));

        const memprobe::LearnedPositions learned =
            memprobe::learned_positions(grid, a.threshold);
        std::string csv = "model,layers,cells,learned,bound\n";
        for (const auto& row : learned.rows)
            csv += std::string(memprobe::to_string(row.model)) + "," +
                   std::to_string(row.layers) + "," + std::to_string(row.cells) + "," +
                   std::to_string(row.learned) + "," + std::to_string(row.bound) + "\n";
        write_file(out_dir + "/" + task_name + "_learned.csv", csv);

        if (by_model.size() > 1) {
            std::vector<std::pair<memprobe::CellKind, memprobe::SweepGrid>> grids(
                by_model.begin(), by_model.end());
            try {
                const memprobe::ModelComparison cmp = memprobe::compare_models(grids);
                std::string wins = "layers,cells,position,best,tie,best_mae\n";
                for (const auto& row : cmp.rows)
                    wins += std::to_string(row.layers) + "," + std::to_string(row.cells) + "," +
                            std::to_string(row.position) + "," +
                            memprobe::to_string(row.best) + "," + (row.tie ? "1" : "0") + "," +
                            memprobe::fmt_double(row.best_mae) + "\n";
                write_file(out_dir + "/" + task_name + "_best_model.csv", wins);
                for (const auto& [model, count] : cmp.wins)
                    std::cout << "wins " << memprobe::to_string(model) << " " << count << "\n";
            } catch (const std::invalid_argument&) {
                std::cout << "model axes differ, skipping comparison for " << task_name << "\n";
            }
        }
    }
    return 0;
}

struct EsnArgs {
    memprobe::EsnConfig config;
    std::vector<std::uint32_t> seeds = {0};
    int jobs = 1;
    std::string out;
};

int run_esn_mc(const EsnArgs& a) {
    const std::string out_dir = resolve_out(a.out);
    echo_config(json{{"command", "esn-mc"},
                     {"neurons", a.config.neurons},
                     {"connectivity", a.config.connectivity},
                     {"spectral_radius", a.config.spectral_radius},
                     {"input_scaling", a.config.input_scaling},
                     {"ridge_lambda", a.config.ridge_lambda},
                     {"washout", a.config.washout},
                     {"stream_len", a.config.stream_len},
                     {"max_delay", a.config.delay_count()},
                     {"linear", a.config.linear},
                     {"seeds", a.seeds},
                     {"jobs", a.jobs},
                     {"out", out_dir}});
    double sum = 0.0;
    for (std::uint32_t seed : a.seeds) {
        memprobe::EsnConfig config = a.config;
        config.seed = seed;
        config.validate();
        const memprobe::McResult mc = memprobe::memory_capacity(config, a.jobs);
        std::ostringstream csv;
        memprobe::write_mc_csv(csv, config, mc);
        write_file(out_dir + "/esn_mc_N" + std::to_string(config.neurons) + "_s" +
                       std::to_string(seed) + ".csv",
                   csv.str());
        std::cout << "seed " << seed << " total_mc " << memprobe::fmt_double(mc.total) << "\n";
        sum += mc.total;
    }
    std::cout << "mean_total_mc " << memprobe::fmt_double(sum / a.seeds.size()) << "\n";
    return 0;
}

struct BaselineArgs {
    std::string task = "random";
    int position = 1;
    int q_min = 10;
    int q_max = 15;
    int episodes = 100000;
    std::uint32_t seed = 1;
    std::string out;
};

int run_baseline(const BaselineArgs& a) {
    const std::string out_dir = resolve_out(a.out);
    echo_config(json{{"command", "baseline"},
                     {"task", a.task},
                     {"position", a.position},
                     {"q_min", a.q_min},
                     {"q_max", a.q_max},
                     {"episodes", a.episodes},
                     {"seed", a.seed},
                     {"out", out_dir}});
    if (a.episodes <= 0) throw std::invalid_argument("baseline: episodes must be > 0");
    const memprobe::TaskSpec task = make_task(a.task, a.position, a.q_min, a.q_max);
    memprobe::Prng rng(a.seed);
    const double mae = memprobe::baseline_mae(task, a.episodes, rng);
    std::string csv = "task,position,episodes,seed,mae\n";
    csv += a.task + "," + std::to_string(a.position) + "," + std::to_string(a.episodes) + "," +
           std::to_string(a.seed) + "," + memprobe::fmt_double(mae) + "\n";
    write_file(out_dir + "/baseline_" + a.task + "_p" + std::to_string(a.position) + ".csv", csv);
    std::cout << "baseline_mae " << memprobe::fmt_double(mae) << "\n";
    return 0;
}

void add_train_flags(CLI::App* cmd, memprobe::TrainConfig& t, SweepArgs* sweep = nullptr) {
    auto* lr = cmd->add_option("--learning-rate,--lr", t.learning_rate, "SGD learning rate")
                   ->capture_default_str();
    auto* epe = cmd->add_option("--episodes-per-epoch", t.episodes_per_epoch,
                                "SGD updates per epoch")
                    ->capture_default_str();
    auto* max_epochs =
        cmd->add_option("--max-epochs", t.max_epochs, "epoch budget")->capture_default_str();
    auto* eval_eps = cmd->add_option("--eval-episodes", t.eval_episodes,
                                     "fresh episodes per evaluation")
                         ->capture_default_str();
    auto* eval_every = cmd->add_option("--eval-every", t.eval_every, "epochs between evaluations")
                           ->capture_default_str();
    auto* early = cmd->add_option("--early-stop-mae", t.early_stop_mae,
                                  "stop when eval MAE drops below this (0 disables)")
                      ->capture_default_str();
    auto* bptt = cmd->add_option("--bptt-truncate", t.bptt_truncate,
                                 "max timesteps gradients flow back (0 = full)")
                     ->capture_default_str();
    if (sweep) {
        sweep->o_lr = lr;
        sweep->o_epe = epe;
        sweep->o_max_epochs = max_epochs;
        sweep->o_eval_eps = eval_eps;
        sweep->o_eval_every = eval_every;
        sweep->o_early = early;
        sweep->o_bptt = bptt;
        sweep->o_train_seed =
            cmd->add_option("--train-seed", t.seed, "base seed all run seeds derive from")
                ->capture_default_str();
    } else {
        cmd->add_option("--seed", t.seed, "training seed")->capture_default_str();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"recurrent-network memorization lab"};
    app.require_subcommand(1);

    GradcheckArgs grad;
    CLI::App* grad_cmd = app.add_subcommand("gradcheck", "compare BPTT to finite differences");
    grad_cmd->add_option("--model", grad.model, "cell kind: rnn|lstm|gru")->capture_default_str();
    grad_cmd->add_option("--layers", grad.layers, "stacked layers")->capture_default_str();
    grad_cmd->add_option("--cells", grad.cells, "cells per layer")->capture_default_str();
    grad_cmd->add_option("--q", grad.q, "sequence length")->capture_default_str();
    grad_cmd->add_option("--seed", grad.seed, "init and episode seed")->capture_default_str();
    grad_cmd->add_option("--tol", grad.tol, "max relative error accepted")->capture_default_str();

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "train one configuration");
    train_cmd->add_option("--model", train.model, "cell kind: rnn|lstm|gru")
        ->capture_default_str();
    train_cmd->add_option("--layers", train.layers, "stacked layers")->capture_default_str();
    train_cmd->add_option("--cells", train.cells, "cells per layer")->capture_default_str();
    train_cmd->add_option("--task", train.task, "random|fixed|correlated")
        ->capture_default_str();
    train_cmd->add_option("--position", train.position, "pth-from-last target")
        ->capture_default_str();
    train_cmd->add_option("--q-min", train.q_min, "shortest sequence")->capture_default_str();
    train_cmd->add_option("--q-max", train.q_max, "longest sequence")->capture_default_str();
    add_train_flags(train_cmd, train.train);
    train_cmd->add_option("--out", train.out, "output directory (default $MEMPROBE_OUT or .)");
    train_cmd->add_flag("--svg", train.svg, "also render the loss curve as SVG");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a training grid with resume");
    sweep_cmd->add_option("--config", sweep.config, "sweep spec JSON file")
        ->check(CLI::ExistingFile);
    sweep.o_models =
        sweep_cmd->add_option("--models", sweep.models, "comma-separated cell kinds")
            ->delimiter(',');
    sweep.o_task = sweep_cmd->add_option("--task", sweep.task, "random|fixed|correlated");
    sweep.o_layers = sweep_cmd->add_option("--layers", sweep.layers, "layer range LO HI")
                         ->expected(2);
    sweep.o_cells = sweep_cmd->add_option("--cells", sweep.cells, "cell range LO HI")
                        ->expected(2);
    sweep.o_positions =
        sweep_cmd->add_option("--positions", sweep.positions, "position range LO HI")
            ->expected(2);
    sweep.o_seeds = sweep_cmd->add_option("--seeds", sweep.seeds, "comma-separated grid seeds")
                        ->delimiter(',');
    add_train_flags(sweep_cmd, sweep.train, &sweep);
    sweep.o_out = sweep_cmd->add_option(
        "--out", sweep.out, "output directory (beats config output_dir, $MEMPROBE_OUT, .)");
    sweep_cmd->add_option("--jobs", sweep.jobs, "concurrent training runs")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    ReportArgs report;
    CLI::App* report_cmd =
        app.add_subcommand("report", "aggregate run logs into grid CSV and SVG figures");
    report_cmd->add_option("--in", report.in, "directory scanned for runs*.csv");
    report_cmd->add_option("--log", report.logs, "explicit run log file(s)")
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--out", report.out, "output directory (default: --in)");
    report_cmd->add_option("--loss-cap", report.loss_cap, "heatmap color scale cap")
        ->capture_default_str();
    report_cmd->add_option("--threshold", report.threshold, "learned-position MAE threshold")
        ->capture_default_str();

    EsnArgs esn;
    CLI::App* esn_cmd = app.add_subcommand("esn-mc", "echo state network memory capacity");
    esn_cmd->add_option("--neurons", esn.config.neurons, "reservoir size")->capture_default_str();
    esn_cmd->add_option("--connectivity", esn.config.connectivity, "nonzero fraction of W_res")
        ->capture_default_str();
    esn_cmd->add_option("--spectral-radius,--rho", esn.config.spectral_radius,
                        "rescaled spectral radius")
        ->capture_default_str();
    esn_cmd->add_option("--input-scaling", esn.config.input_scaling, "input weight range")
        ->capture_default_str();
    esn_cmd->add_option("--ridge-lambda", esn.config.ridge_lambda, "readout regularization")
        ->capture_default_str();
    esn_cmd->add_option("--washout", esn.config.washout, "discarded warmup steps")
        ->capture_default_str();
    esn_cmd->add_option("--stream-len", esn.config.stream_len, "training stream length")
        ->capture_default_str();
    esn_cmd->add_option("--max-delay", esn.config.max_delay, "largest delay (0 = 2N)")
        ->capture_default_str();
    esn_cmd->add_flag("--linear", esn.config.linear, "identity activation instead of tanh");
    esn_cmd->add_option("--seeds", esn.seeds, "comma-separated reservoir seeds")
        ->delimiter(',')
        ->capture_default_str();
    esn_cmd->add_option("--jobs", esn.jobs, "concurrent delays")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    esn_cmd->add_option("--out", esn.out, "output directory (default $MEMPROBE_OUT or .)");

    BaselineArgs base;
    CLI::App* base_cmd = app.add_subcommand("baseline", "fixed-guess (0.5) reference loss");
    base_cmd->add_option("--task", base.task, "random|fixed|correlated")->capture_default_str();
    base_cmd->add_option("--position", base.position, "pth-from-last target")
        ->capture_default_str();
    base_cmd->add_option("--q-min", base.q_min, "shortest sequence")->capture_default_str();
    base_cmd->add_option("--q-max", base.q_max, "longest sequence")->capture_default_str();
    base_cmd->add_option("--episodes", base.episodes, "episodes averaged")->capture_default_str();
    base_cmd->add_option("--seed", base.seed, "episode stream seed")->capture_default_str();
    base_cmd->add_option("--out", base.out, "output directory (default $MEMPROBE_OUT or .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (grad_cmd->parsed()) return run_gradcheck(grad);
        if (train_cmd->parsed()) return run_train(train);
        if (sweep_cmd->parsed()) return run_sweep_cmd(sweep);
        if (report_cmd->parsed()) return run_report(report);
        if (esn_cmd->parsed()) return run_esn_mc(esn);
        if (base_cmd->parsed()) return run_baseline(base);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
