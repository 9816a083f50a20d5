#include "perfplan/amue.hpp"

#include <cmath>
#include <sstream>

namespace perfplan {

namespace {

[[noreturn]] void throw_domain(const char* what, double value) {
    std::ostringstream os;
    os << what << " (got " << value << ")";
    throw DomainError(os.str());
}

} // namespace

void AmueParams::validate() const {
    if (!(a_zs >= 0.0)) throw_domain("AmueParams: a_zs must be >= 0", a_zs);
    if (!(a_t >= 0.0)) throw_domain("AmueParams: a_t must be >= 0", a_t);
    if (!(a_m >= 0.0)) throw_domain("AmueParams: a_m must be >= 0", a_m);
    if (!(alpha_t >= 0.0 && alpha_t <= kAlphaMax))
        throw_domain("AmueParams: alpha_t must be in [0, 1 - 1e-4]", alpha_t);
    if (!(alpha_m >= 0.0 && alpha_m <= kAlphaMax))
        throw_domain("AmueParams: alpha_m must be in [0, 1 - 1e-4]", alpha_m);
}

AmueParams AmueParams::make(double a_zs, double a_t, double alpha_t,
                            double a_m, double alpha_m) {
    AmueParams p{a_zs, a_t, alpha_t, a_m, alpha_m};
    p.validate();
    return p;
}

void CostModel::validate() const {
    if (!(c_t > 0.0)) throw_domain("CostModel: c_t must be > 0", c_t);
    if (!(c_m > 0.0)) throw_domain("CostModel: c_m must be > 0", c_m);
}

CostModel CostModel::make(double c_t, double c_m) {
    CostModel cm{c_t, c_m};
    cm.validate();
    return cm;
}

void RealizableRegion::validate() const {
    if (!(p_max >= 0.0))
        throw_domain("RealizableRegion: p_max must be >= 0", p_max);
}

RealizableRegion RealizableRegion::make(double p_max) {
    RealizableRegion r{p_max};
    r.validate();
    return r;
}

double amue_pow(double x, double alpha) {
    if (x == 0.0) return 0.0;
    if (alpha == 0.0) return 1.0;
    return std::pow(x, alpha);
}

double amue_eval(const AmueParams& params, double t, double m) {
    if (!(t >= 0.0)) throw_domain("amue_eval: t must be >= 0", t);
    if (!(m >= 0.0)) throw_domain("amue_eval: m must be >= 0", m);
    return params.a_zs + params.a_t * amue_pow(t, params.alpha_t) +
           params.a_m * amue_pow(m, params.alpha_m);
}

double translate_train_perf(const AmueParams& params, double p) {
    if (!(p >= 0.0)) throw_domain("translate_train_perf: p must be >= 0", p);
    return amue_eval(params, p, 0.0);
}

double few_shot_perf(const AmueParams& params, double k) {
    if (!(k >= 0.0)) throw_domain("few_shot_perf: k must be >= 0", k);
    return amue_eval(params, 0.0, k);
}

double total_cost(const CostModel& cm, double t, double m) {
    if (!(t >= 0.0)) throw_domain("total_cost: t must be >= 0", t);
    if (!(m >= 0.0)) throw_domain("total_cost: m must be >= 0", m);
    return cm.c_t * t + cm.c_m * m;
}

std::optional<double> isoperf_m_of_t(const AmueParams& params, double pi_c,
                                     double t) {
    if (!(t >= 0.0)) throw_domain("isoperf_m_of_t: t must be >= 0", t);
    if (pi_c < params.a_zs)
        throw InfeasibleError("isoperf_m_of_t: pi_c below the zero-shot level");
    if (params.a_m < kDegenerateCoeff || params.alpha_m < kDegenerateCoeff)
        throw DegenerateError(
            "isoperf_m_of_t: manual term is degenerate; the level curve is a "
            "vertical line in t");
    const double numerator =
        pi_c - params.a_zs - params.a_t * amue_pow(t, params.alpha_t);
    if (numerator < 0.0) return std::nullopt;
    return std::pow(numerator / params.a_m, 1.0 / params.alpha_m);
}

double isoperf_slope(const AmueParams& params, double t, double m) {
    // A vanishing translated marginal product flattens the level curve
    // everywhere, including on the axes.
    if (params.t_term_degenerate()) return 0.0;
    if (params.m_term_degenerate())
        throw DomainError("isoperf_slope: manual marginal product is zero");
    const bool t_singular = t == 0.0 && params.alpha_t < 1.0;
    const bool m_singular = m == 0.0 && params.alpha_m < 1.0;
    if (t_singular || m_singular)
        throw DomainError("isoperf_slope: singular at a zero data size");
    return -(params.alpha_t * params.a_t / (params.alpha_m * params.a_m)) *
           std::pow(t, params.alpha_t - 1.0) /
           std::pow(m, params.alpha_m - 1.0);
}

double expansion_path_m_of_t(const AmueParams& params, const CostModel& cm,
                             double t) {
    if (!(t > 0.0)) throw_domain("expansion_path_m_of_t: t must be > 0", t);
    if (params.t_term_degenerate())
        throw DegenerateError(
            "expansion_path_m_of_t: translated term is degenerate; the path "
            "lies along t = 0");
    if (params.m_term_degenerate())
        throw DegenerateError(
            "expansion_path_m_of_t: manual term is degenerate; the path lies "
            "along m = 0");
    const double coeff =
        std::pow(cm.c_t * params.a_m * params.alpha_m /
                     (cm.c_m * params.a_t * params.alpha_t),
                 1.0 / (1.0 - params.alpha_m));
    return coeff *
           std::pow(t, (1.0 - params.alpha_t) / (1.0 - params.alpha_m));
}

double approx_path_slope(const AmueParams& params, const CostModel& cm) {
    if (params.a_t < kDegenerateCoeff)
        throw DegenerateError("approx_path_slope: a_t is degenerate");
    return std::pow(cm.c_t * params.a_m / (cm.c_m * params.a_t),
                    1.0 / (1.0 - params.alpha_m));
}

} // namespace perfplan
