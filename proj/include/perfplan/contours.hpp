#pragma once

#include <string>
#include <utility>
#include <vector>

#include "perfplan/amue.hpp"
#include "perfplan/gpr.hpp"
#include "perfplan/planner.hpp"

namespace perfplan {

// Every emitted contour vertex evaluates to its level within this margin
// (performance units).
inline constexpr double kContourTol = 0.05;

// One polyline of the level set pi(t, m) = level. Closed-form contours are
// strictly increasing in t; extracted ones are oriented so the first
// vertex has the smallest-t endpoint.
struct Contour {
    double level = 0.0;
    std::vector<std::pair<double, double>> vertices; // (t, m)
    std::string source; // "amue" or "gpr"
};

// Rectangular evaluation grid over [0, t_max] x [0, m_max].
struct GridSpec {
    double t_max = 0.0;
    double m_max = 0.0;
    int nt = 200;
    int nm = 200;

    void validate() const;
    static GridSpec make(double t_max, double m_max, int nt = 200,
                         int nm = 200);
};

// Closed-form isoperf sampled at the given t values; entries where the
// level curve passes below m = 0 are dropped. Throws InfeasibleError when
// no grid point is feasible (or the level is below the zero-shot offset),
// DegenerateError when the manual term cannot be inverted.
Contour amue_isoperf_contour(const AmueParams& params, double pi_c,
                             const std::vector<double>& t_grid);

// Level-set polylines of the posterior mean, extracted cell by cell on the
// grid (marching-squares pairing, saddles resolved by evaluating the cell
// center). Each crossing vertex is sharpened by bisection along its cell
// edge until the posterior mean matches the level within kContourTol.
// A level outside the sampled range yields an empty list.
std::vector<Contour> gpr_isoperf_contour(const GprModel& model, double pi_c,
                                         const GridSpec& spec);

// Cheapest extracted-contour vertex with t <= p_max. on_boundary marks a
// winner within one grid cell of the realizability limit. Throws
// InfeasibleError when no contour vertex lies inside the region.
OperatingPoint gpr_least_cost_point(const GprModel& model, const CostModel& cm,
                                    const RealizableRegion& region,
                                    double pi_c, const GridSpec& spec);

// How the manual-to-translated mix shifts as the target level rises.
enum class Trend { kIncreasing, kConstant, kDecreasing };

struct TrendClass {
    Trend trend = Trend::kConstant;
    double elasticity_gap = 0.0; // alpha_m - alpha_t, the deciding quantity
};

const char* trend_label(Trend trend);

// The M/T ratio along the expansion path grows with performance when
// alpha_m - alpha_t is above tol, shrinks when below -tol, and is treated
// as constant inside the band.
TrendClass classify_mt_trend(const AmueParams& params, double tol = 0.02);

} // namespace perfplan
