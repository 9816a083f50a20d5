#pragma once

#include <vector>

#include "perfplan/amue.hpp"

namespace perfplan {

// A cost-optimal (t, m) mix for one performance level. on_boundary is set
// when the point sits on t = p_max instead of at an interior tangency.
struct OperatingPoint {
    double t = 0.0;
    double m = 0.0;
    double pi = 0.0;
    double cost = 0.0;
    bool on_boundary = false;
};

// Least-cost points at increasing performance levels. pi is strictly
// increasing and cost non-decreasing along the sequence.
using ExpansionPath = std::vector<OperatingPoint>;

// Point on the isoperf pi_c where its slope equals the isocost slope
// -c_t/c_m; unique because amue_eval is strictly increasing along the
// tangency locus. Solved by bracketed bisection in t (log-spaced, since
// near-zero elasticities push the root across many decades), to 1e-9
// relative in performance.
//
// Degenerate coefficients fall back to the axis solutions: a degenerate
// translated term puts the point at (0, M(pi_c)); a degenerate manual term
// puts it on the t-axis. Throws InfeasibleError when pi_c <= a_zs or when
// both terms are degenerate.
OperatingPoint tangency_point(const AmueParams& params, const CostModel& cm,
                              double pi_c);

// Minimum-cost point on the isoperf pi_c restricted to t <= p_max: the
// unconstrained tangency when it is realizable, otherwise the boundary
// point (p_max, M(p_max)) with on_boundary set.
OperatingPoint least_cost_point(const AmueParams& params, const CostModel& cm,
                                const RealizableRegion& region, double pi_c);

// least_cost_point at each level of a strictly increasing list, all above
// a_zs.
ExpansionPath trace_expansion_path(const AmueParams& params,
                                   const CostModel& cm,
                                   const RealizableRegion& region,
                                   const std::vector<double>& pi_levels);

// (performance, minimum cost) pairs along the expansion path.
std::vector<std::pair<double, double>> min_cost_curve(
    const AmueParams& params, const CostModel& cm,
    const RealizableRegion& region, const std::vector<double>& pi_levels);

} // namespace perfplan
