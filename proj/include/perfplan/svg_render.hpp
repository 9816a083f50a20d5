#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perfplan/contours.hpp"
#include "perfplan/planner.hpp"

namespace perfplan {

// Fixed canvas: 800x600 with 10% margins on every side. All figures share
// it so emitted documents are comparable and the transform is a constant
// of the library.
inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;
inline constexpr double kSvgMarginFraction = 0.10;

// Series colors, assigned by index modulo 8.
extern const std::array<const char*, 8> kSeriesPalette;

// Affine, invertible map between data space and pixel space. Pixel y
// grows downward, so the y scale enters with a sign flip.
struct PlotTransform {
    double x_offset = 0.0;
    double y_offset = 0.0;
    double x_scale = 1.0;
    double y_scale = 1.0;

    std::pair<double, double> to_pixel(double x, double y) const {
        return {x_offset + x_scale * x, y_offset - y_scale * y};
    }
    std::pair<double, double> to_data(double px, double py) const {
        return {(px - x_offset) / x_scale, (y_offset - py) / y_scale};
    }
};

// Transform mapping [0, x_max] x [0, y_max] onto the margin box.
PlotTransform plot_transform(double x_max, double y_max);

// Straight isocost line m = slope * t + intercept in data space. For a
// linear cost model the slope is -c_t / c_m.
struct IsocostLine {
    double slope = 0.0;
    double intercept = 0.0;
};

// Everything one T-M diagram can carry. Axis ranges start at zero; every
// drawable element is clipped to them. The realizable region, when
// present, is shaded as a band T <= p_max. guide_mt_line adds the dashed
// M = T reference diagonal.
struct TmDiagramSpec {
    std::vector<Contour> contours;
    std::vector<IsocostLine> isocosts;
    std::optional<ExpansionPath> path;
    std::optional<RealizableRegion> region;
    bool guide_mt_line = false;
    double t_max = 0.0;
    double m_max = 0.0;
    std::string title = "T-M diagram";
    std::string t_label = "machine-translated examples (T)";
    std::string m_label = "manually created examples (M)";

    // DomainError on bad axis ranges or non-finite geometry; RenderError
    // when there is nothing to draw at all.
    void validate() const;
};

// Deterministic standalone SVG 1.1 document: contour polylines, isocost
// lines, the expansion path as a marked polyline, region shading, the
// M = T guide, axis ticks, labels, and a legend.
std::string render_tm_diagram(const TmDiagramSpec& spec);

// One named (pi, cost) series, sorted by non-decreasing cost.
using CostCurveSeries =
    std::pair<std::string, std::vector<std::pair<double, double>>>;

// Multi-series line chart of performance against minimum acquisition
// cost on linear axes, one legend entry per series. RenderError when the
// list or any series is empty or a series is not sorted by cost.
std::string render_cost_curve(const std::vector<CostCurveSeries>& curves);

} // namespace perfplan
