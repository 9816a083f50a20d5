#include "perfplan/svg_render.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "perfplan/errors.hpp"

namespace perfplan {

const std::array<const char*, 8> kSeriesPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

namespace {

constexpr double kPlotX0 = kSvgMarginFraction * kSvgWidth;
constexpr double kPlotY0 = kSvgMarginFraction * kSvgHeight;
constexpr double kPlotW = kSvgWidth - 2.0 * kPlotX0;
constexpr double kPlotH = kSvgHeight - 2.0 * kPlotY0;

using Pt = std::pair<double, double>;

std::string fmt_px(double v) {
    if (std::fabs(v) < 0.005) v = 0.0; // avoid "-0.00"
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw DomainError(std::string(what) + " must be finite");
}

// Liang-Barsky clip of the segment a-b against [0, x_max] x [0, y_max].
std::optional<std::pair<Pt, Pt>> clip_segment(Pt a, Pt b, double x_max,
                                              double y_max) {
    const double dx = b.first - a.first;
    const double dy = b.second - a.second;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.first, x_max - a.first, a.second,
                         y_max - a.second};
    double u0 = 0.0, u1 = 1.0;
    for (int k = 0; k < 4; ++k) {
        if (p[k] == 0.0) {
            if (q[k] < 0.0) return std::nullopt;
            continue;
        }
        const double r = q[k] / p[k];
        if (p[k] < 0.0) {
            if (r > u1) return std::nullopt;
            if (r > u0) u0 = r;
        } else {
            if (r < u0) return std::nullopt;
            if (r < u1) u1 = r;
        }
    }
    return std::pair<Pt, Pt>{
        {a.first + u0 * dx, a.second + u0 * dy},
        {a.first + u1 * dx, a.second + u1 * dy}};
}

// Clips a polyline to the axis box; re-entering segments start new runs.
std::vector<std::vector<Pt>> clip_polyline(const std::vector<Pt>& pts,
                                           double x_max, double y_max) {
    std::vector<std::vector<Pt>> runs;
    std::vector<Pt> current;
    const double eps = 1e-9 * std::max(x_max, y_max);
    const auto flush = [&] {
        if (current.size() >= 2) runs.push_back(current);
        current.clear();
    };
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto seg = clip_segment(pts[i - 1], pts[i], x_max, y_max);
        if (!seg) {
            flush();
            continue;
        }
        const auto& [a, b] = *seg;
        if (!current.empty() &&
            std::fabs(current.back().first - a.first) <= eps &&
            std::fabs(current.back().second - a.second) <= eps) {
            current.push_back(b);
        } else {
            flush();
            current = {a, b};
        }
    }
    flush();
    return runs;
}

std::string points_attribute(const std::vector<Pt>& pts,
                             const PlotTransform& tf) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [x, y] = tf.to_pixel(pts[i].first, pts[i].second);
        if (i) out += ' ';
        out += fmt_px(x);
        out += ',';
        out += fmt_px(y);
    }
    return out;
}

void append_document_header(std::string& svg) {
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
           "width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
    svg += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"800\" "
           "height=\"600\" fill=\"#ffffff\"/>\n";
}

void append_axes(std::string& svg, double x_max, double y_max,
                 const std::string& x_label, const std::string& y_label,
                 const std::string& title, const PlotTransform& tf) {
    svg += "<rect class=\"plot-border\" x=\"" + fmt_px(kPlotX0) + "\" y=\"" +
           fmt_px(kPlotY0) + "\" width=\"" + fmt_px(kPlotW) +
           "\" height=\"" + fmt_px(kPlotH) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double vx = x_max * i / n_ticks;
        const double px = tf.to_pixel(vx, 0.0).first;
        svg += "<line class=\"tick\" x1=\"" + fmt_px(px) + "\" y1=\"" +
               fmt_px(kPlotY0 + kPlotH) + "\" x2=\"" + fmt_px(px) +
               "\" y2=\"" + fmt_px(kPlotY0 + kPlotH + 6) +
               "\" stroke=\"#333333\"/>\n";
        svg += "<text class=\"tick-label\" x=\"" + fmt_px(px) + "\" y=\"" +
               fmt_px(kPlotY0 + kPlotH + 22) +
               "\" text-anchor=\"middle\" font-size=\"11\" "
               "font-family=\"sans-serif\">" +
               fmt_value(vx) + "</text>\n";
        const double vy = y_max * i / n_ticks;
        const double py = tf.to_pixel(0.0, vy).second;
        svg += "<line class=\"tick\" x1=\"" + fmt_px(kPlotX0 - 6) +
               "\" y1=\"" + fmt_px(py) + "\" x2=\"" + fmt_px(kPlotX0) +
               "\" y2=\"" + fmt_px(py) + "\" stroke=\"#333333\"/>\n";
        svg += "<text class=\"tick-label\" x=\"" + fmt_px(kPlotX0 - 10) +
               "\" y=\"" + fmt_px(py + 4) +
               "\" text-anchor=\"end\" font-size=\"11\" "
               "font-family=\"sans-serif\">" +
               fmt_value(vy) + "</text>\n";
    }
    svg += "<text class=\"axis-label\" x=\"" + fmt_px(kPlotX0 + kPlotW / 2) +
           "\" y=\"" + fmt_px(kSvgHeight - 18) +
           "\" text-anchor=\"middle\" font-size=\"13\" "
           "font-family=\"sans-serif\">" +
           xml_escape(x_label) + "</text>\n";
    svg += "<text class=\"axis-label\" x=\"24\" y=\"" +
           fmt_px(kPlotY0 + kPlotH / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" "
           "font-family=\"sans-serif\" transform=\"rotate(-90 24 " +
           fmt_px(kPlotY0 + kPlotH / 2) + ")\">" + xml_escape(y_label) +
           "</text>\n";
    svg += "<text class=\"title\" x=\"" + fmt_px(kSvgWidth / 2.0) +
           "\" y=\"34\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" +
           xml_escape(title) + "</text>\n";
}

struct LegendEntry {
    std::string label;
    std::string color;
    bool dashed = false;
};

void append_legend(std::string& svg, const std::vector<LegendEntry>& entries) {
    if (entries.empty()) return;
    const double x0 = kPlotX0 + kPlotW - 178;
    const double y0 = kPlotY0 + 8;
    const double row = 18.0;
    svg += "<rect class=\"legend-box\" x=\"" + fmt_px(x0) + "\" y=\"" +
           fmt_px(y0) + "\" width=\"170\" height=\"" +
           fmt_px(10 + row * static_cast<double>(entries.size())) +
           "\" fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#999999\"/>\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const double y = y0 + 16 + row * static_cast<double>(i);
        svg += "<line class=\"legend-swatch\" x1=\"" + fmt_px(x0 + 8) +
               "\" y1=\"" + fmt_px(y - 4) + "\" x2=\"" + fmt_px(x0 + 34) +
               "\" y2=\"" + fmt_px(y - 4) + "\" stroke=\"" +
               entries[i].color + "\" stroke-width=\"2\"" +
               (entries[i].dashed ? " stroke-dasharray=\"5 4\"" : "") +
               "/>\n";
        svg += "<text class=\"legend-label\" x=\"" + fmt_px(x0 + 42) +
               "\" y=\"" + fmt_px(y) +
               "\" font-size=\"11\" font-family=\"sans-serif\">" +
               xml_escape(entries[i].label) + "</text>\n";
    }
}

} // namespace

PlotTransform plot_transform(double x_max, double y_max) {
    if (!std::isfinite(x_max) || !std::isfinite(y_max) || x_max <= 0.0 ||
        y_max <= 0.0)
        throw DomainError("axis ranges must be positive and finite");
    PlotTransform tf;
    tf.x_offset = kPlotX0;
    tf.y_offset = kPlotY0 + kPlotH;
    tf.x_scale = kPlotW / x_max;
    tf.y_scale = kPlotH / y_max;
    return tf;
}

void TmDiagramSpec::validate() const {
    if (!std::isfinite(t_max) || !std::isfinite(m_max) || t_max <= 0.0 ||
        m_max <= 0.0)
        throw DomainError("axis ranges must be positive and finite");
    for (const auto& contour : contours) {
        require_finite(contour.level, "contour level");
        for (const auto& [t, m] : contour.vertices) {
            require_finite(t, "contour vertex");
            require_finite(m, "contour vertex");
        }
    }
    for (const auto& iso : isocosts) {
        require_finite(iso.slope, "isocost slope");
        require_finite(iso.intercept, "isocost intercept");
    }
    if (path)
        for (const auto& pt : *path) {
            require_finite(pt.t, "path point");
            require_finite(pt.m, "path point");
        }
    if (region) region->validate();
    const bool has_path = path && !path->empty();
    if (contours.empty() && isocosts.empty() && !has_path && !guide_mt_line)
        throw RenderError("diagram spec has nothing to draw");
}

std::string render_tm_diagram(const TmDiagramSpec& spec) {
    spec.validate();
    const auto tf = plot_transform(spec.t_max, spec.m_max);

    std::string svg;
    svg.reserve(1 << 15);
    append_document_header(svg);

    if (spec.region) {
        const double band = std::min(spec.region->p_max, spec.t_max);
        svg += "<rect class=\"realizable-region\" x=\"" + fmt_px(kPlotX0) +
               "\" y=\"" + fmt_px(kPlotY0) + "\" width=\"" +
               fmt_px(band * tf.x_scale) + "\" height=\"" + fmt_px(kPlotH) +
               "\" fill=\"#e3eef7\"/>\n";
    }

    if (spec.guide_mt_line) {
        const double g = std::min(spec.t_max, spec.m_max);
        const auto [x0, y0] = tf.to_pixel(0.0, 0.0);
        const auto [x1, y1] = tf.to_pixel(g, g);
        svg += "<line class=\"guide-mt\" x1=\"" + fmt_px(x0) + "\" y1=\"" +
               fmt_px(y0) + "\" x2=\"" + fmt_px(x1) + "\" y2=\"" +
               fmt_px(y1) +
               "\" stroke=\"#999999\" stroke-dasharray=\"3 4\"/>\n";
    }

    for (std::size_t i = 0; i < spec.contours.size(); ++i) {
        const auto& contour = spec.contours[i];
        const char* color = kSeriesPalette[i % kSeriesPalette.size()];
        for (const auto& run :
             clip_polyline(contour.vertices, spec.t_max, spec.m_max)) {
            svg += "<polyline class=\"contour\" data-level=\"" +
                   fmt_value(contour.level) + "\" data-source=\"" +
                   xml_escape(contour.source) + "\" fill=\"none\" stroke=\"" +
                   color + "\" stroke-width=\"1.5\" points=\"" +
                   points_attribute(run, tf) + "\"/>\n";
        }
    }

    for (const auto& iso : spec.isocosts) {
        const Pt a{0.0, iso.intercept};
        const Pt b{spec.t_max, iso.slope * spec.t_max + iso.intercept};
        const auto seg = clip_segment(a, b, spec.t_max, spec.m_max);
        if (!seg) continue;
        const auto [p0, p1] = *seg;
        const auto [x0, y0] = tf.to_pixel(p0.first, p0.second);
        const auto [x1, y1] = tf.to_pixel(p1.first, p1.second);
        svg += "<line class=\"isocost\" x1=\"" + fmt_px(x0) + "\" y1=\"" +
               fmt_px(y0) + "\" x2=\"" + fmt_px(x1) + "\" y2=\"" +
               fmt_px(y1) +
               "\" stroke=\"#555555\" stroke-dasharray=\"5 4\"/>\n";
    }

    const bool has_path = spec.path && !spec.path->empty();
    if (has_path) {
        std::vector<Pt> pts;
        pts.reserve(spec.path->size());
        for (const auto& pt : *spec.path) pts.emplace_back(pt.t, pt.m);
        for (const auto& run : clip_polyline(pts, spec.t_max, spec.m_max))
            svg += "<polyline class=\"expansion-path\" fill=\"none\" "
                   "stroke=\"#111111\" stroke-width=\"2\" points=\"" +
                   points_attribute(run, tf) + "\"/>\n";
        for (const auto& [t, m] : pts) {
            if (t < 0.0 || t > spec.t_max || m < 0.0 || m > spec.m_max)
                continue;
            const auto [cx, cy] = tf.to_pixel(t, m);
            svg += "<circle class=\"path-marker\" cx=\"" + fmt_px(cx) +
                   "\" cy=\"" + fmt_px(cy) +
                   "\" r=\"3.5\" fill=\"#111111\"/>\n";
        }
    }

    append_axes(svg, spec.t_max, spec.m_max, spec.t_label, spec.m_label,
                spec.title, tf);

    std::vector<LegendEntry> legend;
    bool mixed_sources = false;
    for (const auto& contour : spec.contours)
        mixed_sources |= contour.source != spec.contours.front().source;
    for (std::size_t i = 0; i < spec.contours.size(); ++i) {
        std::string label = "pi = " + fmt_value(spec.contours[i].level);
        if (mixed_sources) label += " (" + spec.contours[i].source + ")";
        legend.push_back(
            {label, kSeriesPalette[i % kSeriesPalette.size()], false});
    }
    if (!spec.isocosts.empty()) legend.push_back({"isocost", "#555555", true});
    if (has_path) legend.push_back({"expansion path", "#111111", false});
    if (spec.guide_mt_line) legend.push_back({"M = T", "#999999", true});
    append_legend(svg, legend);

    svg += "</svg>\n";
    return svg;
}

std::string render_cost_curve(const std::vector<CostCurveSeries>& curves) {
    if (curves.empty()) throw RenderError("no series to draw");
    double max_cost = 0.0, max_pi = 0.0;
    for (const auto& [label, series] : curves) {
        if (series.empty())
            throw RenderError("series '" + label + "' is empty");
        for (std::size_t i = 0; i < series.size(); ++i) {
            require_finite(series[i].first, "series performance");
            require_finite(series[i].second, "series cost");
            if (i && series[i].second < series[i - 1].second)
                throw RenderError("series '" + label +
                                  "' is not sorted by cost");
            max_pi = std::max(max_pi, series[i].first);
            max_cost = std::max(max_cost, series[i].second);
        }
    }
    const double x_max = max_cost > 0.0 ? 1.05 * max_cost : 1.0;
    const double y_max = max_pi > 0.0 ? 1.05 * max_pi : 1.0;
    const auto tf = plot_transform(x_max, y_max);

    std::string svg;
    svg.reserve(1 << 14);
    append_document_header(svg);

    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::vector<Pt> pts;
        pts.reserve(curves[i].second.size());
        for (const auto& [pi, cost] : curves[i].second)
            pts.emplace_back(cost, pi);
        svg += "<polyline class=\"series\" data-label=\"" +
               xml_escape(curves[i].first) + "\" fill=\"none\" stroke=\"" +
               kSeriesPalette[i % kSeriesPalette.size()] +
               "\" stroke-width=\"2\" points=\"" + points_attribute(pts, tf) +
               "\"/>\n";
    }

    append_axes(svg, x_max, y_max, "total acquisition cost",
                "performance (F1)", "performance vs minimum cost", tf);

    std::vector<LegendEntry> legend;
    for (std::size_t i = 0; i < curves.size(); ++i)
        legend.push_back({curves[i].first,
                          kSeriesPalette[i % kSeriesPalette.size()], false});
    append_legend(svg, legend);

    svg += "</svg>\n";
    return svg;
}

} // namespace perfplan
