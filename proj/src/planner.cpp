#include "perfplan/planner.hpp"

#include <cmath>
#include <limits>

#include "perfplan/root_finding.hpp"

namespace perfplan {

namespace {

constexpr double kPiRelTol = 1e-9;
constexpr double kBracketFloor = 1e-300;
constexpr double kBracketCeil = 1e30;

// Tangency along a degenerate-manual-term surface: the point lies on the
// t-axis where a_zs + a_t * t^alpha_t = pi_c.
OperatingPoint t_axis_point(const AmueParams& params, const CostModel& cm,
                            double pi_c) {
    if (params.a_t < kDegenerateCoeff || params.alpha_t < kDegenerateCoeff)
        throw InfeasibleError(
            "tangency_point: both terms degenerate; pi_c above a_zs is "
            "unreachable");
    const double t = std::pow((pi_c - params.a_zs) / params.a_t,
                              1.0 / params.alpha_t);
    if (!std::isfinite(t))
        throw InfeasibleError(
            "tangency_point: level unreachable within numeric range");
    OperatingPoint p;
    p.t = t;
    p.m = 0.0;
    p.pi = amue_eval(params, t, 0.0);
    p.cost = total_cost(cm, t, 0.0);
    return p;
}

OperatingPoint m_axis_point(const AmueParams& params, const CostModel& cm,
                            double pi_c) {
    const double m = isoperf_m_of_t(params, pi_c, 0.0).value();
    OperatingPoint p;
    p.t = 0.0;
    p.m = m;
    p.pi = amue_eval(params, 0.0, m);
    p.cost = total_cost(cm, 0.0, m);
    return p;
}

} // namespace

OperatingPoint tangency_point(const AmueParams& params, const CostModel& cm,
                              double pi_c) {
    params.validate();
    cm.validate();
    if (!(pi_c > params.a_zs))
        throw InfeasibleError(
            "tangency_point: pi_c must exceed the zero-shot level");
    if (params.t_term_degenerate()) {
        if (params.a_m < kDegenerateCoeff || params.alpha_m < kDegenerateCoeff)
            throw InfeasibleError(
                "tangency_point: both terms degenerate; pi_c above a_zs is "
                "unreachable");
        return m_axis_point(params, cm, pi_c);
    }
    if (params.m_term_degenerate()) return t_axis_point(params, cm, pi_c);

    // Performance along the tangency locus, strictly increasing in t.
    const auto level = [&](double t) {
        return amue_eval(params, t, expansion_path_m_of_t(params, cm, t)) -
               pi_c;
    };

    double lo = 1.0;
    double hi = 1.0;
    while (level(lo) > 0.0 && lo > kBracketFloor) lo *= 1e-3;
    if (level(lo) > 0.0) {
        // The tangency t is below representable range (an elasticity within
        // rounding of zero). The infimum is approached along t -> 0+; the
        // isoperf point at the bracket floor attains it to machine
        // precision.
        const auto m = isoperf_m_of_t(params, pi_c, lo);
        OperatingPoint p;
        p.t = lo;
        p.m = m.value_or(0.0);
        p.pi = amue_eval(params, p.t, p.m);
        p.cost = total_cost(cm, p.t, p.m);
        return p;
    }
    while (level(hi) < 0.0 && hi < kBracketCeil) hi *= 10.0;
    if (level(hi) < 0.0)
        throw InfeasibleError(
            "tangency_point: level unreachable within numeric range");
    const double t_star = detail::bisect_increasing_log(
        level, lo, hi, kPiRelTol * std::fabs(pi_c));
    const double m_star = expansion_path_m_of_t(params, cm, t_star);

    OperatingPoint p;
    p.t = t_star;
    p.m = m_star;
    p.pi = amue_eval(params, t_star, m_star);
    p.cost = total_cost(cm, t_star, m_star);
    return p;
}

OperatingPoint least_cost_point(const AmueParams& params, const CostModel& cm,
                                const RealizableRegion& region, double pi_c) {
    region.validate();
    const OperatingPoint unconstrained = tangency_point(params, cm, pi_c);
    if (unconstrained.t <= region.p_max) return unconstrained;

    if (params.a_m < kDegenerateCoeff || params.alpha_m < kDegenerateCoeff)
        throw InfeasibleError(
            "least_cost_point: level requires t beyond p_max and no manual "
            "term can compensate");

    // Constrained optimum: clamp to the boundary t = p_max. Cost along the
    // isoperf is convex and minimized at the (unreachable) tangency, so the
    // nearest realizable t is optimal.
    OperatingPoint p;
    p.t = region.p_max;
    p.m = isoperf_m_of_t(params, pi_c, region.p_max).value();
    p.pi = amue_eval(params, p.t, p.m);
    p.cost = total_cost(cm, p.t, p.m);
    p.on_boundary = true;
    return p;
}

ExpansionPath trace_expansion_path(const AmueParams& params,
                                   const CostModel& cm,
                                   const RealizableRegion& region,
                                   const std::vector<double>& pi_levels) {
    for (std::size_t i = 0; i < pi_levels.size(); ++i) {
        if (!(pi_levels[i] > params.a_zs))
            throw DomainError(
                "trace_expansion_path: every level must exceed a_zs");
        if (i > 0 && !(pi_levels[i] > pi_levels[i - 1]))
            throw DomainError(
                "trace_expansion_path: levels must be strictly increasing");
    }
    ExpansionPath path;
    path.reserve(pi_levels.size());
    for (const double pi_c : pi_levels)
        path.push_back(least_cost_point(params, cm, region, pi_c));
    return path;
}

std::vector<std::pair<double, double>> min_cost_curve(
    const AmueParams& params, const CostModel& cm,
    const RealizableRegion& region, const std::vector<double>& pi_levels) {
    const ExpansionPath path =
        trace_expansion_path(params, cm, region, pi_levels);
    std::vector<std::pair<double, double>> curve;
    curve.reserve(path.size());
    for (const OperatingPoint& p : path) curve.emplace_back(p.pi, p.cost);
    return curve;
}

} // namespace perfplan
