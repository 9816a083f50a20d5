#include "perfplan/contours.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

namespace perfplan {

void GridSpec::validate() const {
    if (!(t_max > 0.0) || !(m_max > 0.0))
        throw DomainError("grid spec: axis ranges must be positive");
    if (nt < 2 || nm < 2)
        throw DomainError("grid spec: need at least 2 samples per axis");
}

GridSpec GridSpec::make(double t_max, double m_max, int nt, int nm) {
    GridSpec spec{t_max, m_max, nt, nm};
    spec.validate();
    return spec;
}

Contour amue_isoperf_contour(const AmueParams& params, double pi_c,
                             const std::vector<double>& t_grid) {
    if (t_grid.empty())
        throw DomainError("isoperf sampling grid is empty");
    std::vector<double> ts = t_grid;
    std::sort(ts.begin(), ts.end());

    Contour contour;
    contour.level = pi_c;
    contour.source = "amue";
    for (const double t : ts) {
        if (!(t >= 0.0) || !std::isfinite(t))
            throw DomainError("isoperf sampling grid contains an invalid t");
        if (const auto m = isoperf_m_of_t(params, pi_c, t))
            contour.vertices.emplace_back(t, *m);
    }
    if (contour.vertices.empty())
        throw InfeasibleError(
            "the level curve does not intersect the sampled t range");
    return contour;
}

namespace {

// Grid edges carry the contour vertices; cells connect them. An edge is
// identified by its lower-left grid node and direction.
struct EdgeKey {
    int i = 0, j = 0;
    int dir = 0; // 0: to (i+1, j); 1: to (i, j+1)

    friend bool operator<(const EdgeKey& a, const EdgeKey& b) {
        return std::tie(a.i, a.j, a.dir) < std::tie(b.i, b.j, b.dir);
    }
    friend bool operator==(const EdgeKey& a, const EdgeKey& b) {
        return a.i == b.i && a.j == b.j && a.dir == b.dir;
    }
};

struct Segment {
    EdgeKey a, b;
};

using Point = std::pair<double, double>;

} // namespace

std::vector<Contour> gpr_isoperf_contour(const GprModel& model, double pi_c,
                                         const GridSpec& spec) {
    spec.validate();
    const int nt = spec.nt, nm = spec.nm;
    const double dt = spec.t_max / (nt - 1);
    const double dm = spec.m_max / (nm - 1);
    auto t_of = [&](int i) { return dt * i; };
    auto m_of = [&](int j) { return dm * j; };
    auto mean_at = [&](double t, double m) {
        return gpr_predict(model, t, m).first;
    };

    std::vector<double> field(static_cast<std::size_t>(nt) * nm);
    auto value = [&](int i, int j) -> double& {
        return field[static_cast<std::size_t>(j) * nt + i];
    };
    for (int j = 0; j < nm; ++j)
        for (int i = 0; i < nt; ++i) value(i, j) = mean_at(t_of(i), m_of(j));

    const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
    if (pi_c < *lo_it || pi_c > *hi_it) return {};

    // Sharpened crossing point on one grid edge, shared between the two
    // cells that touch the edge.
    std::map<EdgeKey, Point> vertex_on;
    auto edge_vertex = [&](const EdgeKey& key) -> Point {
        const auto found = vertex_on.find(key);
        if (found != vertex_on.end()) return found->second;

        const Point p0{t_of(key.i), m_of(key.j)};
        const Point p1{key.dir == 0 ? t_of(key.i + 1) : t_of(key.i),
                       key.dir == 0 ? m_of(key.j) : m_of(key.j + 1)};
        const double f0 =
            value(key.i, key.j) - pi_c;
        const double f1 = (key.dir == 0 ? value(key.i + 1, key.j)
                                        : value(key.i, key.j + 1)) -
                          pi_c;
        Point lo = p0, hi = p1;
        double g_lo = f0, g_hi = f1;
        if (g_lo > g_hi) {
            std::swap(lo, hi);
            std::swap(g_lo, g_hi);
        }
        Point best = std::fabs(g_lo) < std::fabs(g_hi) ? lo : hi;
        if (std::min(std::fabs(g_lo), std::fabs(g_hi)) > 0.5 * kContourTol) {
            for (int it = 0; it < 60; ++it) {
                const Point mid{0.5 * (lo.first + hi.first),
                                0.5 * (lo.second + hi.second)};
                const double g = mean_at(mid.first, mid.second) - pi_c;
                if (g < 0.0)
                    lo = mid;
                else
                    hi = mid;
                best = mid;
                if (std::fabs(g) <= 0.5 * kContourTol) break;
            }
        }
        vertex_on.emplace(key, best);
        return best;
    };

    // Cell-by-cell segment table. Corner k high <=> value >= level; the
    // two ambiguous diagonal masks are split by the sign at the center.
    std::vector<Segment> segments;
    for (int j = 0; j + 1 < nm; ++j) {
        for (int i = 0; i + 1 < nt; ++i) {
            const bool h0 = value(i, j) >= pi_c;
            const bool h1 = value(i + 1, j) >= pi_c;
            const bool h2 = value(i + 1, j + 1) >= pi_c;
            const bool h3 = value(i, j + 1) >= pi_c;
            const int mask = (h0 ? 1 : 0) | (h1 ? 2 : 0) | (h2 ? 4 : 0) |
                             (h3 ? 8 : 0);
            if (mask == 0 || mask == 15) continue;

            const EdgeKey bottom{i, j, 0};
            const EdgeKey right{i + 1, j, 1};
            const EdgeKey top{i, j + 1, 0};
            const EdgeKey left{i, j, 1};
            auto emit = [&](const EdgeKey& a, const EdgeKey& b) {
                segments.push_back({a, b});
            };

            switch (mask) {
                case 1: case 14: emit(left, bottom); break;
                case 2: case 13: emit(bottom, right); break;
                case 3: case 12: emit(left, right); break;
                case 4: case 11: emit(right, top); break;
                case 6: case 9: emit(bottom, top); break;
                case 7: case 8: emit(top, left); break;
                case 5:
                case 10: {
                    const double center =
                        mean_at(t_of(i) + 0.5 * dt, m_of(j) + 0.5 * dm);
                    const bool center_high = center >= pi_c;
                    // Which corner pair the high band connects decides the
                    // pairing of the four crossing edges.
                    if ((mask == 5) == center_high) {
                        emit(bottom, right);
                        emit(top, left);
                    } else {
                        emit(left, bottom);
                        emit(right, top);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // Chain segments that share a grid edge into polylines.
    std::map<EdgeKey, std::vector<std::size_t>> at_edge;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        at_edge[segments[s].a].push_back(s);
        at_edge[segments[s].b].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    std::vector<Contour> out;
    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        used[s0] = true;
        std::vector<EdgeKey> chain = {segments[s0].a, segments[s0].b};

        // Grow from either end until the chain closes or runs out.
        for (int side = 0; side < 2; ++side) {
            for (;;) {
                const EdgeKey tip = side == 0 ? chain.back() : chain.front();
                const auto& candidates = at_edge[tip];
                std::size_t next = segments.size();
                for (const std::size_t s : candidates)
                    if (!used[s]) {
                        next = s;
                        break;
                    }
                if (next == segments.size()) break;
                used[next] = true;
                const EdgeKey far =
                    segments[next].a == tip ? segments[next].b
                                            : segments[next].a;
                if (side == 0)
                    chain.push_back(far);
                else
                    chain.insert(chain.begin(), far);
                if (chain.front() == chain.back()) break; // closed loop
            }
        }

        Contour contour;
        contour.level = pi_c;
        contour.source = "gpr";
        contour.vertices.reserve(chain.size());
        for (const auto& key : chain)
            contour.vertices.push_back(edge_vertex(key));
        if (contour.vertices.front().first > contour.vertices.back().first)
            std::reverse(contour.vertices.begin(), contour.vertices.end());
        out.push_back(std::move(contour));
    }

    std::sort(out.begin(), out.end(), [](const Contour& a, const Contour& b) {
        return a.vertices.front() < b.vertices.front();
    });
    return out;
}

OperatingPoint gpr_least_cost_point(const GprModel& model, const CostModel& cm,
                                    const RealizableRegion& region,
                                    double pi_c, const GridSpec& spec) {
    cm.validate();
    region.validate();
    const auto contours = gpr_isoperf_contour(model, pi_c, spec);
    const double cell_dt = spec.t_max / (spec.nt - 1);

    std::optional<OperatingPoint> best;
    for (const auto& contour : contours) {
        for (const auto& [t, m] : contour.vertices) {
            if (t > region.p_max) continue;
            const double cost = total_cost(cm, t, m);
            if (!best || cost < best->cost ||
                (cost == best->cost && std::tie(t, m) < std::tie(best->t,
                                                                 best->m))) {
                OperatingPoint pt;
                pt.t = t;
                pt.m = m;
                pt.pi = gpr_predict(model, t, m).first;
                pt.cost = cost;
                pt.on_boundary = region.p_max - t < cell_dt;
                best = pt;
            }
        }
    }
    if (!best)
        throw InfeasibleError(
            "no contour vertex at this level lies inside the realizable "
            "region");
    return *best;
}

const char* trend_label(Trend trend) {
    switch (trend) {
        case Trend::kIncreasing: return "increasing";
        case Trend::kDecreasing: return "decreasing";
        case Trend::kConstant: break;
    }
    return "constant";
}

TrendClass classify_mt_trend(const AmueParams& params, double tol) {
    params.validate();
    if (!(tol >= 0.0))
        throw DomainError("trend tolerance must be non-negative");
    TrendClass result;
    result.elasticity_gap = params.alpha_m - params.alpha_t;
    if (result.elasticity_gap > tol)
        result.trend = Trend::kIncreasing;
    else if (result.elasticity_gap < -tol)
        result.trend = Trend::kDecreasing;
    else
        result.trend = Trend::kConstant;
    return result;
}

} // namespace perfplan
