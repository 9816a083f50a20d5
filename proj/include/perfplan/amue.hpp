#pragma once

#include <optional>

#include "perfplan/errors.hpp"

namespace perfplan {

// Exponents are capped at 1 - kAlphaMargin: the expansion-path closed form
// has a 1/(1 - alpha_m) singularity at alpha = 1, and fitted elasticities
// sit far below it anyway.
inline constexpr double kAlphaMargin = 1e-4;
inline constexpr double kAlphaMax = 1.0 - kAlphaMargin;

// Coefficients below this are treated as exactly zero when deciding
// whether a closed form degenerates to an axis-aligned special case.
inline constexpr double kDegenerateCoeff = 1e-10;

// Additive performance model with unequal elasticities:
//   pi(t, m) = a_zs + a_t * t^alpha_t + a_m * m^alpha_m
// Performance is on the 0-100 scale. a_zs is the zero-shot level reached
// with no target-language data at all.
struct AmueParams {
    double a_zs = 0.0;    // performance offset at t = m = 0
    double a_t = 0.0;     // translated-data coefficient
    double alpha_t = 0.0; // translated-data elasticity, in [0, 1 - 1e-4]
    double a_m = 0.0;     // manual-data coefficient
    double alpha_m = 0.0; // manual-data elasticity, in [0, 1 - 1e-4]

    // Throws DomainError if any invariant is violated.
    void validate() const;

    static AmueParams make(double a_zs, double a_t, double alpha_t,
                           double a_m, double alpha_m);

    bool t_term_degenerate() const { return a_t * alpha_t < kDegenerateCoeff; }
    bool m_term_degenerate() const { return a_m * alpha_m < kDegenerateCoeff; }
};

// Linear acquisition cost: c_t per translated example, c_m per manual one.
struct CostModel {
    double c_t = 0.0;
    double c_m = 0.0;

    void validate() const;
    static CostModel make(double c_t, double c_m);

    // Relative cheapness of a translated example vs a manual one.
    double cost_ratio() const { return c_t / c_m; }
};

// Translation cannot exceed the pivot dataset: points with t > p_max are
// not realizable. Manual data is unconstrained.
struct RealizableRegion {
    double p_max = 0.0;

    void validate() const;
    static RealizableRegion make(double p_max);

    bool contains(double t, double m) const {
        return t >= 0.0 && t <= p_max && m >= 0.0;
    }
};

// x^alpha with the model's origin convention: zero data contributes zero
// performance for every alpha in [0, 1), including alpha = 0.
double amue_pow(double x, double alpha);

// Evaluate the performance surface at (t, m). Negative sizes throw.
double amue_eval(const AmueParams& params, double t, double m);

// Performance when the full pivot set is translated and no manual data is
// collected: amue_eval(params, p, 0).
double translate_train_perf(const AmueParams& params, double p);

// Performance with k manual examples only: amue_eval(params, 0, k).
double few_shot_perf(const AmueParams& params, double k);

// Total acquisition cost c_t*t + c_m*m.
double total_cost(const CostModel& cm, double t, double m);

// Manual-data requirement M(t) along the level curve pi = pi_c:
//   M = ((pi_c - a_zs - a_t * t^alpha_t) / a_m)^(1/alpha_m)
// Returns nullopt when the translated term alone already exceeds pi_c at
// this t (the level curve does not pass above it).
// Throws InfeasibleError for pi_c < a_zs and DegenerateError when the
// manual term cannot be inverted (a_m or alpha_m numerically zero; the
// level curve is then a vertical line in t).
std::optional<double> isoperf_m_of_t(const AmueParams& params, double pi_c,
                                     double t);

// dM/dT along the level curve through (t, m):
//   -(alpha_t * a_t / (alpha_m * a_m)) * t^(alpha_t - 1) / m^(alpha_m - 1)
// Always <= 0. Returns exactly 0 when the translated term is degenerate.
// Throws DomainError at t = 0 or m = 0 where a fractional exponent makes
// the slope singular.
double isoperf_slope(const AmueParams& params, double t, double m);

// Locus of isoperf/isocost tangency points:
//   M = (c_t * a_m * alpha_m / (c_m * a_t * alpha_t))^(1/(1 - alpha_m))
//       * t^((1 - alpha_t)/(1 - alpha_m))
// Throws DegenerateError when either marginal product vanishes (the path
// collapses onto an axis; callers handle those cases explicitly).
double expansion_path_m_of_t(const AmueParams& params, const CostModel& cm,
                             double t);

// Slope of the expansion path under the equal-elasticity approximation
// (alpha_m = alpha_t substituted into the path closed form):
//   (c_t * a_m / (c_m * a_t))^(1/(1 - alpha_m))
// Fitted elasticities are usually close enough that the true path is
// nearly this straight line through the origin.
double approx_path_slope(const AmueParams& params, const CostModel& cm);

} // namespace perfplan
