#pragma once

#include <string>
#include <vector>

#include "memprobe/sweep.hpp"
#include "memprobe/training.hpp"

namespace memprobe {

struct HeatmapStyle {
    double loss_cap = 0.25;  // losses render clamped to [0, loss_cap]
};

// Position of a value on the color ramp, clamped to [0, 1].
double ramp_position(double value, double cap);
// Two-stop linear ramp, dark blue (#0d1b5e) at 0 to light yellow (#faf0a0)
// at cap, as "#rrggbb".
std::string ramp_color(double value, double cap);

// Stroke color keyed by task position (10-color cycle).
std::string color_for_position(int p);

// One panel per (model, layers): x axis = cells, y axis = position, one
// colored rect per grid cell, plus a shared legend. 900x300 per panel,
// byte-deterministic for a given grid.
std::string heatmap_svg(const SweepGrid& grid, const HeatmapStyle& style = {});

struct TaggedCurve {
    int position = 0;
    TrainResult result;
};

// One polyline per run over (epoch, eval MAE), color keyed by position,
// y axis fixed to [0, 0.5] with the 0.25 fixed-guess gridline.
std::string losscurves_svg(const std::vector<TaggedCurve>& curves);

inline constexpr const char* kGridHeader =
    "model,layers,cells,position,mean_mae,std_mae,n_runs,n_diverged";

// Grid rows in stored order (canonical when produced by aggregate);
// export -> import -> export is byte-identical.
std::string export_csv(const SweepGrid& grid);
SweepGrid import_grid_csv(const std::string& text);

}  // namespace memprobe
