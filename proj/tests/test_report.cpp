#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprobe/report.hpp"
#include "memprobe/sweep.hpp"

using memprobe::CellKind;
using memprobe::color_for_position;
using memprobe::export_csv;
using memprobe::GridCell;
using memprobe::heatmap_svg;
using memprobe::HeatmapStyle;
using memprobe::import_grid_csv;
using memprobe::kGridHeader;
using memprobe::losscurves_svg;
using memprobe::ramp_color;
using memprobe::ramp_position;
using memprobe::SweepGrid;
using memprobe::TaggedCurve;

namespace {

int count_of(const std::string& hay, const std::string& needle) {
    int n = 0;
    for (std::size_t pos = hay.find(needle); pos != std::string::npos;
         pos = hay.find(needle, pos + needle.size()))
        ++n;
    return n;
}

// Minimal tag-balance check. Enough to catch unterminated elements and
// mismatched nesting in the generated SVG.
bool xml_balanced(const std::string& s) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while ((i = s.find('<', i)) != std::string::npos) {
        const std::size_t end = s.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = s.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) return false;
        const bool closing = tag[0] == '/';
        const bool selfclosing = tag.back() == '/';
        if (closing) tag = tag.substr(1);
        std::string name;
        for (char c : tag) {
            if (c == ' ' || c == '/' || c == '\n') break;
            name += c;
        }
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!selfclosing) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

SweepGrid demo_grid() {
    SweepGrid grid;
    for (int l = 1; l <= 2; ++l)
        for (int c = 1; c <= 3; ++c)
            for (int p = 1; p <= 4; ++p) {
                GridCell cell;
                cell.model = l == 1 ? CellKind::rnn : CellKind::lstm;
                cell.layers = l;
                cell.cells = c;
                cell.position = p;
                cell.mean_mae = 0.02 * p + 0.001 * c;
                cell.std_mae = 0.005;
                cell.n_runs = 5;
                cell.n_diverged = 0;
                grid.cells.push_back(cell);
            }
    return grid;
}

}  // namespace

TEST_CASE("ramp position clamps to [0, 1]") {
    CHECK(ramp_position(-1.0, 0.25) == 0.0);
    CHECK(ramp_position(0.0, 0.25) == 0.0);
    CHECK(ramp_position(0.125, 0.25) == doctest::Approx(0.5));
    CHECK(ramp_position(0.25, 0.25) == 1.0);
    CHECK(ramp_position(7.0, 0.25) == 1.0);
    CHECK(ramp_position(0.1, 1.0) == doctest::Approx(0.1));

    for (double v = 0.0; v < 0.24; v += 0.01)
        CHECK(ramp_position(v, 0.25) <= ramp_position(v + 0.01, 0.25));

    CHECK_THROWS_AS(ramp_position(0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ramp_position(0.1, -0.25), std::invalid_argument);
}

TEST_CASE("color ramp endpoints and midpoint") {
    CHECK(ramp_color(0.0, 0.25) == "#0d1b5e");
    CHECK(ramp_color(-3.0, 0.25) == "#0d1b5e");
    CHECK(ramp_color(0.25, 0.25) == "#faf0a0");
    CHECK(ramp_color(10.0, 0.25) == "#faf0a0");

    // midpoint: lround of the channel-wise linear interpolation
    auto mid = [](int lo, int hi) { return static_cast<int>(std::lround(lo + 0.5 * (hi - lo))); };
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mid(0x0d, 0xfa), mid(0x1b, 0xf0),
                  mid(0x5e, 0xa0));
    CHECK(ramp_color(0.125, 0.25) == buf);
}

TEST_CASE("position palette cycles with period 10") {
    for (int p = 1; p <= 10; ++p) {
        CHECK(color_for_position(p) == color_for_position(p + 10));
        CHECK(color_for_position(p) == color_for_position(p + 20));
    }
    for (int a = 1; a <= 10; ++a)
        for (int b = a + 1; b <= 10; ++b) CHECK(color_for_position(a) != color_for_position(b));
    CHECK_THROWS_AS(color_for_position(0), std::invalid_argument);
    CHECK_THROWS_AS(color_for_position(-2), std::invalid_argument);
}

TEST_CASE("heatmap renders one panel per (model, layers) pair") {
    const SweepGrid grid = demo_grid();
    const std::string svg = heatmap_svg(grid);

    // each panel draws exactly one frame; the demo grid has two panels
    CHECK(count_of(svg, "fill=\"none\" stroke=\"#333333\"") == 2);
    CHECK(count_of(svg, "rnn l=1") == 1);
    CHECK(count_of(svg, "lstm l=2") == 1);

    // background + 24 cells + 2 frames + 64 legend steps
    CHECK(count_of(svg, "<rect ") == 1 + 24 + 2 + 64);
    CHECK(count_of(svg, "mean MAE (clamped)") == 1);
    CHECK(xml_balanced(svg));
}

TEST_CASE("heatmap clamps hot cells to the cap color") {
    SweepGrid grid;
    GridCell cell;
    cell.model = CellKind::gru;
    cell.layers = 1;
    cell.cells = 1;
    cell.position = 1;
    cell.mean_mae = 5.0;
    grid.cells.push_back(cell);

    HeatmapStyle style;
    style.loss_cap = 0.25;
    const std::string svg = heatmap_svg(grid, style);
    CHECK(count_of(svg, "fill=\"#faf0a0\"") >= 1);
    CHECK(count_of(svg, "gru l=1") == 1);
}

TEST_CASE("heatmap output is byte deterministic") {
    const SweepGrid grid = demo_grid();
    CHECK(heatmap_svg(grid) == heatmap_svg(grid));
}

TEST_CASE("heatmap rejects bad input") {
    CHECK_THROWS_AS(heatmap_svg(SweepGrid{}), std::invalid_argument);
    HeatmapStyle style;
    style.loss_cap = 0.0;
    CHECK_THROWS_AS(heatmap_svg(demo_grid(), style), std::invalid_argument);
}

TEST_CASE("loss curve plot draws one polyline per run") {
    std::vector<TaggedCurve> curves;
    for (int p = 1; p <= 3; ++p) {
        TaggedCurve c;
        c.position = p;
        for (int e = 10; e <= 100; e += 10) c.result.loss_curve.push_back({e, 0.3 / p / e * 10});
        curves.push_back(c);
    }
    const std::string svg = losscurves_svg(curves);

    CHECK(count_of(svg, "<polyline ") == 3);
    CHECK(count_of(svg, "stroke-dasharray") == 1);  // the 0.25 gridline
    CHECK(count_of(svg, ">0.25<") == 1);
    CHECK(count_of(svg, ">0.5<") == 1);
    CHECK(count_of(svg, ">epoch<") == 1);
    for (int p = 1; p <= 3; ++p) {
        CHECK(count_of(svg, "p=" + std::to_string(p)) == 1);
        CHECK(count_of(svg, std::string("stroke=\"") + color_for_position(p) + "\"") == 2);
    }
    CHECK(xml_balanced(svg));
    CHECK(losscurves_svg(curves) == svg);
}

TEST_CASE("loss curve plot clamps values to the axis range") {
    TaggedCurve c;
    c.position = 1;
    c.result.loss_curve = {{1, 2.0}};
    const std::string svg = losscurves_svg({c});
    // axis: y=20 is the top of the frame (MAE 0.5); a diverged value pins there
    CHECK(count_of(svg, "points=\"860,20\"") == 1);
}

TEST_CASE("loss curve plot skips empty curves but rejects empty input") {
    TaggedCurve full;
    full.position = 2;
    full.result.loss_curve = {{1, 0.1}, {2, 0.05}};
    TaggedCurve hollow;
    hollow.position = 3;
    const std::string svg = losscurves_svg({full, hollow});
    CHECK(count_of(svg, "<polyline ") == 1);

    CHECK_THROWS_AS(losscurves_svg({}), std::invalid_argument);
}

TEST_CASE("grid csv export round trips byte for byte") {
    SweepGrid grid = demo_grid();
    grid.cells[3].mean_mae = 1.0 / 3.0;
    grid.cells[4].std_mae = 1e-17;
    grid.cells[5].n_diverged = 2;

    const std::string once = export_csv(grid);
    CHECK(once.substr(0, std::string(kGridHeader).size()) == kGridHeader);

    const SweepGrid back = import_grid_csv(once);
    REQUIRE(back.cells.size() == grid.cells.size());
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        CHECK(back.cells[i].model == grid.cells[i].model);
        CHECK(back.cells[i].layers == grid.cells[i].layers);
        CHECK(back.cells[i].cells == grid.cells[i].cells);
        CHECK(back.cells[i].position == grid.cells[i].position);
        CHECK(back.cells[i].mean_mae == grid.cells[i].mean_mae);
        CHECK(back.cells[i].std_mae == grid.cells[i].std_mae);
        CHECK(back.cells[i].n_runs == grid.cells[i].n_runs);
        CHECK(back.cells[i].n_diverged == grid.cells[i].n_diverged);
    }
    CHECK(export_csv(back) == once);
}

TEST_CASE("grid csv import tolerates CRLF and blank lines") {
    std::string text = std::string(kGridHeader) + "\r\n";
    text += "gru,2,7,3,0.125,0.01,5,1\r\n";
    text += "\n";
    const SweepGrid grid = import_grid_csv(text);
    REQUIRE(grid.cells.size() == 1);
    CHECK(grid.cells[0].model == CellKind::gru);
    CHECK(grid.cells[0].layers == 2);
    CHECK(grid.cells[0].cells == 7);
    CHECK(grid.cells[0].position == 3);
    CHECK(grid.cells[0].mean_mae == 0.125);
    CHECK(grid.cells[0].n_diverged == 1);
}

TEST_CASE("grid csv import rejects foreign schemas") {
    CHECK_THROWS_AS(import_grid_csv(""), std::invalid_argument);
    CHECK_THROWS_AS(import_grid_csv("a,b,c\n1,2,3\n"), std::invalid_argument);
    CHECK_THROWS_AS(import_grid_csv(std::string(kGridHeader) + ",extra\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(import_grid_csv(std::string(kGridHeader) + "\nrnn,1,1,1,0.1,0.0,5\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(import_grid_csv(std::string(kGridHeader) + "\nrnn,1,1,1,0.1,0.0,5,0,9\n"),
                    std::invalid_argument);
    CHECK_THROWS(import_grid_csv(std::string(kGridHeader) + "\nmlp,1,1,1,0.1,0.0,5,0\n"));
}
