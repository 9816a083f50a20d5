// Standalone acceptance checks for the planning library. Each numbered
// criterion prints exactly one PASS/FAIL/SKIP line; the exit status is the
// number of failures.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perfplan/amue.hpp"
#include "perfplan/amue_fit.hpp"
#include "perfplan/contours.hpp"
#include "perfplan/fit_report.hpp"
#include "perfplan/gpr.hpp"
#include "perfplan/planner.hpp"
#include "perfplan/svg_render.hpp"
#include "test_support.hpp"

using namespace perfplan;
using testsupport::Rng;
using testsupport::uniform;

namespace {

// nullopt = pass; otherwise the failure detail.
using CheckResult = std::optional<std::string>;

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(std::fabs(want), 1e-12);
}

// ---------------------------------------------------------------- 1 ----
// The closed-form slope approximation (c_t a_m / (c_m a_t))^(1/(1-alpha_m))
// at the Swahili-style reference coefficients and two benchmark cost ratios.
CheckResult check_slope_approximation() {
    const auto params = AmueParams::make(47.0, 5.2e-2, 0.42, 1.1, 0.37);
    const double cheap = approx_path_slope(params, CostModel::make(0.1, 1.0));
    if (std::fabs(cheap - 3.2) > 0.15)
        return fmt("slope at ratio 0.1 is %.6f, outside 3.2 +/- 0.15", cheap);
    const double very_cheap =
        approx_path_slope(params, CostModel::make(0.01, 1.0));
    if (std::fabs(very_cheap - 0.08) > 0.01)
        return fmt("slope at ratio 0.01 is %.6f, outside 0.08 +/- 0.01",
                   very_cheap);
    return std::nullopt;
}

// ---------------------------------------------------------------- 2 ----
// least_cost_point vs an exhaustive unit-resolution search over
// [0, 5e4]^2: cost within 0.5%, position within one grid cell.
CheckResult check_tangency_vs_grid() {
    Rng rng(101);
    const double bound = 5e4;
    const auto region = RealizableRegion::make(bound);
    for (int trial = 0; trial < 50; ++trial) {
        AmueParams params = AmueParams::make(40, 0.5, 0.4, 2.0, 0.3);
        double pi_c = 0.0;
        for (;;) {
            params = AmueParams::make(uniform(rng, 25.0, 60.0),
                                      uniform(rng, 0.1, 3.0),
                                      uniform(rng, 0.20, 0.65),
                                      uniform(rng, 0.1, 3.0),
                                      uniform(rng, 0.20, 0.65));
            const double t0 = uniform(rng, 100.0, 2e4);
            const double m0 = uniform(rng, 100.0, 2e4);
            pi_c = amue_eval(params, t0, m0);
            // Keep the whole level curve inside the searched square.
            const auto m_at_origin = isoperf_m_of_t(params, pi_c, 0.0);
            if (m_at_origin && *m_at_origin < 0.8 * bound &&
                *m_at_origin > 10.0)
                break;
        }
        const double c_t = uniform(rng, 0.002, 0.05);
        const auto cm =
            CostModel::make(c_t, c_t / uniform(rng, 0.05, 0.5));

        const auto point = least_cost_point(params, cm, region, pi_c);
        const auto grid = testsupport::grid_least_cost(
            params, cm, pi_c, static_cast<long>(bound), bound);
        if (!grid)
            return fmt("trial %.0f: grid search found no feasible point",
                       trial);
        if (std::fabs(point.cost - grid->cost) > 0.005 * grid->cost)
            return fmt("cost %.6f vs grid %.6f differs by more than 0.5%%",
                       point.cost, grid->cost);
        if (std::fabs(point.t - grid->t) > 1.0 + 1e-9)
            return fmt("t %.3f vs grid %.3f differs by more than one cell",
                       point.t, grid->t);
        if (std::fabs(point.m - grid->m) > 1.0 + 1e-9)
            return fmt("m %.3f vs grid %.3f differs by more than one cell",
                       point.m, grid->m);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- 3 ----
// When the unconstrained tangency needs more translation than the pivot
// allows, the constrained optimum sits exactly on t = p_max and cannot be
// cheaper than the tangency.
CheckResult check_boundary_clipping() {
    Rng rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        const auto params = testsupport::random_params(rng);
        const auto cm = testsupport::random_cost(rng);
        const double pi_c = params.a_zs + uniform(rng, 3.0, 25.0);
        const auto free_point = tangency_point(params, cm, pi_c);
        if (!(free_point.t > 0.0)) {
            --trial; // degenerate draw; resample
            continue;
        }
        const double p_max = free_point.t * uniform(rng, 0.3, 0.9);
        const auto clipped = least_cost_point(
            params, cm, RealizableRegion::make(p_max), pi_c);
        if (clipped.t != p_max)
            return fmt("constrained t %.9g is not exactly p_max %.9g",
                       clipped.t, p_max);
        if (!clipped.on_boundary) return "boundary point not flagged";
        if (clipped.cost < free_point.cost * (1.0 - 1e-9))
            return fmt("clipped cost %.6f undercuts the tangency %.6f",
                       clipped.cost, free_point.cost);
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- 4 ----
// Parameter recovery: exact on a clean 7x7 grid, and a held-out RMSE no
// worse than 1.5 sigma under Gaussian noise.
CheckResult check_parameter_recovery() {
    const auto truth = AmueParams::make(40.0, 0.5, 0.4, 2.0, 0.3);
    const std::vector<double> sizes = {0.0,    250.0,  500.0, 1000.0,
                                       2000.0, 4000.0, 8000.0};
    const auto clean = testsupport::surface_observations(
        truth, testsupport::grid_points(sizes, sizes));
    const auto exact = fit_amue(clean);
    const double worst = std::max(
        {rel_err(exact.params.a_zs, truth.a_zs),
         rel_err(exact.params.a_t, truth.a_t),
         rel_err(exact.params.alpha_t, truth.alpha_t),
         rel_err(exact.params.a_m, truth.a_m),
         rel_err(exact.params.alpha_m, truth.alpha_m)});
    if (worst > 1e-3)
        return fmt("noise-free recovery off by %.2e relative (> 1e-3)",
                   worst);

    Rng rng(303);
    std::vector<std::pair<double, double>> train_pts, test_pts;
    for (int i = 0; i < 100; ++i)
        train_pts.emplace_back(uniform(rng, 0.0, 8000.0),
                               uniform(rng, 0.0, 4000.0));
    for (int i = 0; i < 40; ++i)
        test_pts.emplace_back(uniform(rng, 0.0, 8000.0),
                              uniform(rng, 0.0, 4000.0));
    const double sigma = 0.5;
    const auto train =
        testsupport::surface_observations(truth, train_pts, sigma, &rng);
    const auto test =
        testsupport::surface_observations(truth, test_pts, sigma, &rng);
    const auto fit = fit_amue(train);
    const AmueParams p = fit.params;
    const auto report = evaluate_fit(
        [p](double t, double m) { return amue_eval(p, t, m); }, test, "test");
    if (report.rmse > 0.75)
        return fmt("held-out RMSE %.3f exceeds 0.75 at sigma 0.5",
                   report.rmse);
    return std::nullopt;
}

// ---------------------------------------------------------------- 5 ----
// Marginal-likelihood gradient vs central finite differences, and exact
// interpolation of the posterior mean when the noise term is negligible.
CheckResult check_gpr_correctness() {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8 + static_cast<int>(uniform(rng, 0.0, 12.0));
        Eigen::MatrixXd inputs(n, 2);
        Eigen::VectorXd targets(n);
        for (int i = 0; i < n; ++i) {
            inputs(i, 0) = uniform(rng, 0.0, 1.0);
            inputs(i, 1) = uniform(rng, 0.0, 1.0);
            targets[i] = 10.0 * std::sin(3.0 * inputs(i, 0)) +
                         8.0 * std::cos(2.0 * inputs(i, 1)) +
                         uniform(rng, -0.5, 0.5);
        }
        const int d_ls = (trial % 2 == 0) ? 1 : 2;
        Eigen::VectorXd theta(d_ls + 2);
        for (int d = 0; d < d_ls; ++d)
            theta[d] = std::log(uniform(rng, 0.1, 2.0));
        theta[d_ls] = std::log(uniform(rng, 0.5, 50.0));
        theta[d_ls + 1] = std::log(uniform(rng, 0.01, 1.0));

        Eigen::VectorXd grad;
        gpr_log_marginal(inputs, targets, theta, &grad);
        const double h = 1e-5;
        for (int k = 0; k < theta.size(); ++k) {
            Eigen::VectorXd lo = theta, hi = theta;
            lo[k] -= h;
            hi[k] += h;
            const double fd = (gpr_log_marginal(inputs, targets, hi) -
                               gpr_log_marginal(inputs, targets, lo)) /
                              (2.0 * h);
            const double err =
                std::fabs(grad[k] - fd) / std::max(std::fabs(fd), 1e-8);
            if (err > 1e-4)
                return fmt("gradient component %.0f off by %.2e relative",
                           k, err);
        }
    }

    // Interpolation: a posterior with a vanishing noise term must pass
    // through its noise-free training targets.
    const int side = 4;
    const int n = side * side;
    GprModel model;
    model.length_scale = Eigen::VectorXd::Constant(1, 0.35);
    model.signal_variance = 60.0;
    model.noise_variance = 1e-10;
    model.input_scale = 1.0;
    model.training_inputs.resize(n, 2);
    Eigen::VectorXd targets(n);
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j) {
            const int k = i * side + j;
            model.training_inputs(k, 0) = i / 3.0;
            model.training_inputs(k, 1) = j / 3.0;
            targets[k] = 55.0 + 6.0 * std::sin(2.0 * i / 3.0) +
                         4.0 * std::cos(1.5 * j / 3.0);
        }
    model.target_mean = targets.mean();
    Eigen::MatrixXd gram(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const double d0 = (model.training_inputs(a, 0) -
                               model.training_inputs(b, 0)) /
                              model.length_scale[0];
            const double d1 = (model.training_inputs(a, 1) -
                               model.training_inputs(b, 1)) /
                              model.length_scale[0];
            gram(a, b) = model.signal_variance *
                         std::exp(-0.5 * (d0 * d0 + d1 * d1));
        }
    gram.diagonal().array() += model.noise_variance;
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        return "interpolation gram matrix is not positive definite";
    model.chol_factor = llt.matrixL();
    model.dual_weights =
        llt.solve(targets - Eigen::VectorXd::Constant(n, model.target_mean));
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto [mean, var] = gpr_predict(
            model, model.training_inputs(k, 0), model.training_inputs(k, 1));
        worst = std::max(worst, std::fabs(mean - targets[k]));
        if (!(var >= 0.0)) return "negative posterior variance";
    }
    if (worst > 1e-6)
        return fmt("noise-free interpolation residual %.2e exceeds 1e-6",
                   worst);
    return std::nullopt;
}

// ---------------------------------------------------------------- 6 ----
// Property suites, each over at least 200 generated cases.
CheckResult check_invariants() {
    constexpr int kCases = 200;

    { // monotonicity of the surface in both inputs
        Rng rng(601);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const double t1 = uniform(rng, 0.0, 2e4);
            const double t2 = t1 + uniform(rng, 0.0, 2e4);
            const double m1 = uniform(rng, 0.0, 2e4);
            const double m2 = m1 + uniform(rng, 0.0, 2e4);
            if (amue_eval(p, t2, m2) < amue_eval(p, t1, m1) - 1e-12)
                return "surface is not monotone in its inputs";
        }
    }
    { // level curves at different levels never intersect
        Rng rng(602);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const double lo = p.a_zs + uniform(rng, 1.0, 15.0);
            const double hi = lo + uniform(rng, 0.5, 10.0);
            const double t = uniform(rng, 0.0, 1e4);
            const auto m_lo = isoperf_m_of_t(p, lo, t);
            const auto m_hi = isoperf_m_of_t(p, hi, t);
            if (m_lo && m_hi && !(*m_hi > *m_lo))
                return fmt("level curves cross at t = %.3f", t);
        }
    }
    { // evaluating the curve point reproduces the level
        Rng rng(603);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const double pi_c = p.a_zs + uniform(rng, 1.0, 25.0);
            const double t = uniform(rng, 0.0, 1e4);
            const auto m = isoperf_m_of_t(p, pi_c, t);
            if (!m) continue;
            if (rel_err(amue_eval(p, t, *m), pi_c) > 1e-9)
                return "round trip through the level curve drifts";
        }
    }
    { // tangency point satisfies the slope condition
        Rng rng(604);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const auto cm = testsupport::random_cost(rng);
            const double pi_c = p.a_zs + uniform(rng, 2.0, 20.0);
            const auto pt = tangency_point(p, cm, pi_c);
            if (!(pt.t > 0.0) || !(pt.m > 0.0)) continue;
            const double slope = -(p.a_t * p.alpha_t *
                                   std::pow(pt.t, p.alpha_t - 1.0)) /
                                 (p.a_m * p.alpha_m *
                                  std::pow(pt.m, p.alpha_m - 1.0));
            if (rel_err(-slope, cm.cost_ratio()) > 1e-6)
                return fmt("tangency slope %.9g vs cost ratio %.9g", -slope,
                           cm.cost_ratio());
        }
    }
    { // trend classification matches the sampled path direction
        Rng rng(605);
        int done = 0;
        while (done < kCases) {
            const auto p = testsupport::random_params(rng);
            if (std::fabs(p.alpha_m - p.alpha_t) < 0.05) continue;
            const auto cm = testsupport::random_cost(rng);
            const auto region = RealizableRegion::make(1e12);
            const std::vector<double> levels = {
                p.a_zs + 4.0, p.a_zs + 10.0, p.a_zs + 16.0};
            const auto path = trace_expansion_path(p, cm, region, levels);
            const double first = path.front().m / path.front().t;
            const double last = path.back().m / path.back().t;
            const auto cls = classify_mt_trend(p);
            if (cls.trend == Trend::kIncreasing && !(last > first))
                return "classified increasing but the sampled ratio falls";
            if (cls.trend == Trend::kDecreasing && !(last < first))
                return "classified decreasing but the sampled ratio rises";
            ++done;
        }
    }
    { // spending split at the optimum matches the elasticity-weighted
      // contribution of each term
        Rng rng(606);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const auto cm = testsupport::random_cost(rng);
            const double pi_c = p.a_zs + uniform(rng, 2.0, 20.0);
            const auto pt = tangency_point(p, cm, pi_c);
            if (!(pt.t > 0.0) || !(pt.m > 0.0)) continue;
            const double spend_ratio = (cm.c_t * pt.t) / (cm.c_m * pt.m);
            const double term_ratio =
                (p.alpha_t * p.a_t * std::pow(pt.t, p.alpha_t)) /
                (p.alpha_m * p.a_m * std::pow(pt.m, p.alpha_m));
            if (rel_err(spend_ratio, term_ratio) > 1e-6)
                return fmt("spend ratio %.9g vs term ratio %.9g",
                           spend_ratio, term_ratio);
        }
    }
    { // the path is ordered: performance up, cost never down
        Rng rng(607);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const auto cm = testsupport::random_cost(rng);
            const auto region =
                RealizableRegion::make(uniform(rng, 100.0, 1e5));
            std::vector<double> levels;
            for (int k = 0; k < 6; ++k)
                levels.push_back(p.a_zs + 2.0 + 3.5 * k);
            const auto path = trace_expansion_path(p, cm, region, levels);
            for (std::size_t k = 1; k < path.size(); ++k) {
                if (!(path[k].pi > path[k - 1].pi))
                    return "path performance is not strictly increasing";
                if (path[k].cost < path[k - 1].cost * (1.0 - 1e-12))
                    return "path cost decreases";
            }
        }
    }
    { // each extra unit of performance costs at least as much as the last
        Rng rng(608);
        for (int i = 0; i < kCases; ++i) {
            const auto p = testsupport::random_params(rng);
            const auto cm = testsupport::random_cost(rng);
            const auto region = RealizableRegion::make(1e12);
            std::vector<double> levels;
            for (int k = 0; k < 8; ++k)
                levels.push_back(p.a_zs + 2.0 + 2.5 * k);
            const auto curve = min_cost_curve(p, cm, region, levels);
            double last_slope = 0.0;
            for (std::size_t k = 1; k < curve.size(); ++k) {
                const double slope =
                    (curve[k].second - curve[k - 1].second) /
                    (curve[k].first - curve[k - 1].first);
                if (slope < last_slope * (1.0 - 1e-9))
                    return "marginal cost of performance decreases";
                last_slope = slope;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- 8 ----
// Rendering of the canonical planning diagram, with geometric checks on
// the emitted pixel coordinates.

struct SvgTag {
    std::string text;
    std::string attr(const std::string& name) const {
        const auto key = name + "=\"";
        const auto at = text.find(key);
        if (at == std::string::npos) return "";
        const auto end = text.find('"', at + key.size());
        return text.substr(at + key.size(), end - (at + key.size()));
    }
};

std::vector<SvgTag> tags_of(const std::string& svg, const std::string& open) {
    std::vector<SvgTag> found;
    std::size_t at = 0;
    while ((at = svg.find(open, at)) != std::string::npos) {
        const auto end = svg.find('>', at);
        found.push_back({svg.substr(at, end - at)});
        at = end;
    }
    return found;
}

std::vector<std::pair<double, double>> parse_points(const std::string& list) {
    std::vector<std::pair<double, double>> pts;
    std::istringstream in(list);
    std::string pair;
    while (in >> pair) {
        const auto comma = pair.find(',');
        pts.emplace_back(std::stod(pair.substr(0, comma)),
                         std::stod(pair.substr(comma + 1)));
    }
    return pts;
}

double cross(std::pair<double, double> o, std::pair<double, double> a,
             std::pair<double, double> b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
}

bool segments_cross(std::pair<double, double> p1, std::pair<double, double> p2,
                    std::pair<double, double> q1,
                    std::pair<double, double> q2) {
    const double d1 = cross(q1, q2, p1), d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1), d4 = cross(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 &&
           d2 != 0 && d3 != 0 && d4 != 0;
}

CheckResult check_rendering() {
    const auto params = AmueParams::make(47.0, 5.2e-2, 0.42, 1.1, 0.37);
    const auto cm = CostModel::make(0.1, 1.0);
    const auto region = RealizableRegion::make(3696.0);
    const std::vector<double> levels = {55.0, 60.0, 65.0, 70.0};

    TmDiagramSpec spec;
    spec.t_max = 5000.0;
    spec.m_max = 4000.0;
    spec.region = region;
    spec.guide_mt_line = true;
    std::vector<double> grid(101);
    for (int i = 0; i < 101; ++i) grid[i] = 5000.0 * i / 100.0;
    for (const double level : levels)
        spec.contours.push_back(amue_isoperf_contour(params, level, grid));
    spec.path = trace_expansion_path(params, cm, region, levels);
    for (const auto& pt : *spec.path)
        spec.isocosts.push_back(
            {-cm.cost_ratio(), pt.m + cm.cost_ratio() * pt.t});
    const std::string svg = render_tm_diagram(spec);

    if (svg.rfind("<?xml", 0) != 0) return "missing XML declaration";
    if (svg.find("</svg>") == std::string::npos) return "unterminated root";
    if (tags_of(svg, "<svg").size() != 1) return "expected one svg root";
    if (svg.find("class=\"realizable-region\"") == std::string::npos)
        return "no shaded realizable region";
    if (tags_of(svg, "<polyline class=\"expansion-path\"").empty())
        return "no expansion path drawn";
    if (tags_of(svg, "<circle class=\"path-marker\"").size() < 4)
        return "fewer than 4 path markers";

    const auto contours = tags_of(svg, "<polyline class=\"contour\"");
    if (contours.size() < 4) return "fewer than 4 contour polylines";
    std::vector<std::vector<std::pair<double, double>>> chains;
    for (const auto& tag : contours)
        chains.push_back(parse_points(tag.attr("points")));
    for (std::size_t a = 0; a < chains.size(); ++a)
        for (std::size_t b = a + 1; b < chains.size(); ++b)
            for (std::size_t i = 1; i < chains[a].size(); ++i)
                for (std::size_t j = 1; j < chains[b].size(); ++j)
                    if (segments_cross(chains[a][i - 1], chains[a][i],
                                       chains[b][j - 1], chains[b][j]))
                        return fmt("contours %.0f and %.0f cross",
                                   static_cast<double>(a),
                                   static_cast<double>(b));

    const auto isocosts = tags_of(svg, "<line class=\"isocost\"");
    if (isocosts.size() < 4) return "fewer than 4 isocost lines";
    std::optional<double> slope;
    double first_span = 0.0;
    for (const auto& tag : isocosts) {
        const double x1 = std::stod(tag.attr("x1"));
        const double y1 = std::stod(tag.attr("y1"));
        const double x2 = std::stod(tag.attr("x2"));
        const double y2 = std::stod(tag.attr("y2"));
        if (x2 == x1) return "vertical isocost line";
        const double s = (y2 - y1) / (x2 - x1);
        const double span = std::fabs(x2 - x1);
        // Emitted coordinates are quantized to 0.01 px, which perturbs a
        // slope by up to ~0.02 / span.
        const double tol = 0.03 / std::min(span, first_span > 0.0
                                                     ? first_span
                                                     : span);
        if (slope && std::fabs(s - *slope) > tol)
            return fmt("isocost slopes %.9g and %.9g are not parallel", s,
                       *slope);
        if (!slope) first_span = span;
        slope = s;
    }
    return std::nullopt;
}

int report(int number, const char* what, const CheckResult& outcome) {
    if (!outcome) {
        std::printf("criterion %d: PASS - %s\n", number, what);
        return 0;
    }
    std::printf("criterion %d: FAIL - %s: %s\n", number, what,
                outcome->c_str());
    return 1;
}

} // namespace

int main() {
    int failures = 0;
    failures += report(1, "expansion-path slope approximation at cost "
                          "ratios 0.1 and 0.01",
                       check_slope_approximation());
    failures += report(2, "least-cost point vs exhaustive unit-grid search",
                       check_tangency_vs_grid());
    failures += report(3, "realizable-region boundary clipping",
                       check_boundary_clipping());
    failures += report(4, "closed-form parameter recovery and held-out "
                          "error",
                       check_parameter_recovery());
    failures += report(5, "surrogate gradient and interpolation checks",
                       check_gpr_correctness());
    failures += report(6, "eight property suites, 200 cases each",
                       check_invariants());
    std::printf(
        "criterion 7: SKIP - full-scale experiment reproduction needs the "
        "original performance data, which is not bundled; criteria 1-6 "
        "constitute acceptance\n");
    failures += report(8, "planning diagram rendering and geometry",
                       check_rendering());
    if (failures == 0)
        std::printf("all acceptance criteria satisfied (1-6, 8; 7 skipped)\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
