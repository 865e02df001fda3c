#include "memprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "memprobe/csvio.hpp"

namespace memprobe {

double ramp_position(double value, double cap) {
    if (cap <= 0.0) throw std::invalid_argument("ramp_position: cap must be > 0");
    if (value <= 0.0) return 0.0;
    if (value >= cap) return 1.0;
    return value / cap;
}

namespace {

constexpr int kRampLow[3] = {0x0d, 0x1b, 0x5e};   // dark blue
constexpr int kRampHigh[3] = {0xfa, 0xf0, 0xa0};  // light yellow

std::string hex_color(int r, int g, int b) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) { return fmt_double(v); }

void open_svg(std::string& s, double width, double height) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
         num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\" font-family=\"sans-serif\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#ffffff\"/>\n";
}

void add_text(std::string& s, double x, double y, const std::string& text,
              const char* anchor = "start", int size = 12) {
    s += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
         "\" font-size=\"" + std::to_string(size) + "\">" + text + "</text>\n";
}

void add_legend(std::string& s, double x, double y, double cap) {
    const int steps = 64;
    const double w = 320.0, h = 14.0;
    for (int i = 0; i < steps; ++i) {
        const double v = cap * (i + 0.5) / steps;
        s += "<rect x=\"" + num(x + w * i / steps) + "\" y=\"" + num(y) + "\" width=\"" +
             num(w / steps + 0.5) + "\" height=\"" + num(h) + "\" fill=\"" +
             ramp_color(v, cap) + "\"/>\n";
    }
    add_text(s, x, y + h + 14, "0");
    add_text(s, x + w, y + h + 14, num(cap), "end");
    add_text(s, x + w + 16, y + h - 2, "mean MAE (clamped)");
}

}  // namespace

std::string ramp_color(double value, double cap) {
    const double t = ramp_position(value, cap);
    int rgb[3];
    for (int i = 0; i < 3; ++i)
        rgb[i] = static_cast<int>(std::lround(kRampLow[i] + t * (kRampHigh[i] - kRampLow[i])));
    return hex_color(rgb[0], rgb[1], rgb[2]);
}

std::string color_for_position(int p) {
    if (p < 1) throw std::invalid_argument("color_for_position: p >= 1");
    return kPalette[(p - 1) % 10];
}

std::string heatmap_svg(const SweepGrid& grid, const HeatmapStyle& style) {
    if (grid.cells.empty()) throw std::invalid_argument("heatmap_svg: empty grid");
    if (style.loss_cap <= 0.0) throw std::invalid_argument("heatmap_svg: loss_cap > 0");

    std::set<std::pair<int, int>> panel_keys;  // (model, layers)
    std::set<int> c_values, p_values;
    for (const GridCell& cell : grid.cells) {
        panel_keys.insert({static_cast<int>(cell.model), cell.layers});
        c_values.insert(cell.cells);
        p_values.insert(cell.position);
    }
    const std::vector<int> cs(c_values.begin(), c_values.end());
    const std::vector<int> ps(p_values.begin(), p_values.end());
    auto index_of = [](const std::vector<int>& v, int x) {
        return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
    };

    const double panel_w = 900.0, panel_h = 300.0;
    const double legend_h = 60.0;
    const double width = panel_w;
    const double height = panel_h * panel_keys.size() + legend_h;

    std::string s;
    open_svg(s, width, height);

    int panel_idx = 0;
    for (const auto& [model_int, layers] : panel_keys) {
        const CellKind model = static_cast<CellKind>(model_int);
        const double top = panel_idx * panel_h;
        const double x0 = 70, x1 = 870;
        const double y0 = top + 35, y1 = top + 250;
        const double cw = (x1 - x0) / cs.size();
        const double ch = (y1 - y0) / ps.size();

        add_text(s, panel_w / 2, top + 20,
                 std::string(to_string(model)) + " l=" + std::to_string(layers), "middle", 14);

        for (const GridCell& cell : grid.cells) {
            if (static_cast<int>(cell.model) != model_int || cell.layers != layers) continue;
            const double cx = x0 + cw * index_of(cs, cell.cells);
            const double cy = y0 + ch * index_of(ps, cell.position);
            s += "<rect x=\"" + num(cx) + "\" y=\"" + num(cy) + "\" width=\"" + num(cw) +
                 "\" height=\"" + num(ch) + "\" fill=\"" +
                 ramp_color(cell.mean_mae, style.loss_cap) + "\"/>\n";
        }

        for (std::size_t i = 0; i < cs.size(); ++i)
            add_text(s, x0 + cw * (i + 0.5), y1 + 16, std::to_string(cs[i]), "middle", 11);
        for (std::size_t i = 0; i < ps.size(); ++i)
            add_text(s, x0 - 8, y0 + ch * (i + 0.5) + 4, std::to_string(ps[i]), "end", 11);
        add_text(s, (x0 + x1) / 2, y1 + 34, "cells c", "middle", 12);
        add_text(s, 16, (y0 + y1) / 2, "p", "start", 12);

        s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) +
             "\" height=\"" + num(y1 - y0) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
        ++panel_idx;
    }

    add_legend(s, 70, height - legend_h + 10, style.loss_cap);
    s += "</svg>\n";
    return s;
}

std::string losscurves_svg(const std::vector<TaggedCurve>& curves) {
    if (curves.empty()) throw std::invalid_argument("losscurves_svg: no curves");

    int max_epoch = 1;
    std::set<int> positions;
    for (const TaggedCurve& c : curves) {
        positions.insert(c.position);
        for (const auto& [epoch, mae] : c.result.loss_curve) max_epoch = std::max(max_epoch, epoch);
    }

    const double width = 900, height = 300;
    const double x0 = 70, x1 = 860, y0 = 20, y1 = 260;
    const double y_cap = 0.5;

    auto to_x = [&](double epoch) { return x0 + (x1 - x0) * epoch / max_epoch; };
    auto to_y = [&](double mae) {
        const double v = std::clamp(mae, 0.0, y_cap);
        return y1 - (y1 - y0) * v / y_cap;
    };

    std::string s;
    open_svg(s, width, height);

    // frame, baseline gridline at 0.25, y ticks
    s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) +
         "\" height=\"" + num(y1 - y0) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
    s += "<line x1=\"" + num(x0) + "\" y1=\"" + num(to_y(0.25)) + "\" x2=\"" + num(x1) +
         "\" y2=\"" + num(to_y(0.25)) +
         "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    add_text(s, x0 - 8, to_y(0.0) + 4, "0", "end", 11);
    add_text(s, x0 - 8, to_y(0.25) + 4, "0.25", "end", 11);
    add_text(s, x0 - 8, to_y(0.5) + 4, "0.5", "end", 11);
    add_text(s, (x0 + x1) / 2, y1 + 28, "epoch", "middle", 12);
    add_text(s, x1, y1 + 14, std::to_string(max_epoch), "end", 11);
    add_text(s, x0, y1 + 14, "0", "middle", 11);
    add_text(s, 14, (y0 + y1) / 2, "MAE", "start", 11);

    for (const TaggedCurve& c : curves) {
        if (c.result.loss_curve.empty()) continue;
        std::string points;
        for (const auto& [epoch, mae] : c.result.loss_curve) {
            points += num(to_x(epoch)) + "," + num(to_y(mae)) + " ";
        }
        points.pop_back();
        s += "<polyline fill=\"none\" stroke=\"" + color_for_position(c.position) +
             "\" stroke-width=\"1\" stroke-opacity=\"0.8\" points=\"" + points + "\"/>\n";
    }

    // legend: one swatch per distinct position
    double ly = y0 + 4;
    for (int p : positions) {
        s += "<line x1=\"" + num(x1 - 60) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(x1 - 44) +
             "\" y2=\"" + num(ly) + "\" stroke=\"" + color_for_position(p) +
             "\" stroke-width=\"2\"/>\n";
        add_text(s, x1 - 40, ly + 4, "p=" + std::to_string(p), "start", 11);
        ly += 14;
    }

    s += "</svg>\n";
    return s;
}

std::string export_csv(const SweepGrid& grid) {
    std::string out = kGridHeader;
    out += '\n';
    for (const GridCell& cell : grid.cells) {
        out += to_string(cell.model);
        out += ',';
        out += std::to_string(cell.layers) + ',' + std::to_string(cell.cells) + ',' +
               std::to_string(cell.position) + ',';
        out += fmt_double(cell.mean_mae) + ',' + fmt_double(cell.std_mae) + ',';
        out += std::to_string(cell.n_runs) + ',' + std::to_string(cell.n_diverged);
        out += '\n';
    }
    return out;
}

SweepGrid import_grid_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("grid csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kGridHeader)
        throw std::invalid_argument("grid csv: header mismatch (other schema version?)");

    SweepGrid grid;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 8)
            throw std::invalid_argument("grid csv: expected 8 fields, got " +
                                        std::to_string(f.size()));
        GridCell cell;
        cell.model = cell_kind_from_string(f[0]);
        cell.layers = std::stoi(f[1]);
        cell.cells = std::stoi(f[2]);
        cell.position = std::stoi(f[3]);
        cell.mean_mae = parse_double(f[4]);
        cell.std_mae = parse_double(f[5]);
        cell.n_runs = std::stoi(f[6]);
        cell.n_diverged = std::stoi(f[7]);
        grid.cells.push_back(cell);
    }
    return grid;
}

}  // namespace memprobe
