#include "perfplan/amue_fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "perfplan/detail/random_util.hpp"

namespace perfplan {

void FitOptions::validate() const {
    if (max_iterations <= 0)
        throw DomainError("fit options: max_iterations must be positive");
    if (!(tolerance > 0.0))
        throw DomainError("fit options: tolerance must be positive");
    if (restarts < 1)
        throw DomainError("fit options: restarts must be at least 1");
}

namespace {

// Unconstrained coordinates u map onto the bounded parameter vector:
//   a_zs    = 100 * sigmoid(u0)         in (0, 100)
//   a_t     = exp(u1)                   in (0, inf)
//   alpha_t = kAlphaMax * sigmoid(u2)   in (0, kAlphaMax)
//   a_m     = exp(u3)
//   alpha_m = kAlphaMax * sigmoid(u4)
// Keeping |u| <= kCoordCap avoids overflow while still reaching
// coefficients as small as exp(-60) ~ 1e-26.
constexpr int kDim = 5;
constexpr double kCoordCap = 60.0;

using Coords = Eigen::Matrix<double, kDim, 1>;

double sigmoid(double u) {
    return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u))
                    : std::exp(u) / (1.0 + std::exp(u));
}

double logit(double p) {
    const double q = std::clamp(p, 1e-15, 1.0 - 1e-15);
    return std::log(q / (1.0 - q));
}

Coords clamp_coords(Coords u) {
    for (int i = 0; i < kDim; ++i)
        u[i] = std::clamp(u[i], -kCoordCap, kCoordCap);
    return u;
}

AmueParams coords_to_params(const Coords& u) {
    AmueParams p;
    p.a_zs = 100.0 * sigmoid(u[0]);
    p.a_t = std::exp(u[1]);
    p.alpha_t = kAlphaMax * sigmoid(u[2]);
    p.a_m = std::exp(u[3]);
    p.alpha_m = kAlphaMax * sigmoid(u[4]);
    return p;
}

Coords params_to_coords(const AmueParams& p) {
    Coords u;
    u[0] = logit(p.a_zs / 100.0);
    u[1] = std::log(std::max(p.a_t, 1e-25));
    u[2] = logit(p.alpha_t / kAlphaMax);
    u[3] = std::log(std::max(p.a_m, 1e-25));
    u[4] = logit(p.alpha_m / kAlphaMax);
    return clamp_coords(u);
}

struct Problem {
    Eigen::VectorXd t, m, y;

    Eigen::Index size() const { return y.size(); }

    Eigen::VectorXd residuals(const AmueParams& p) const {
        Eigen::VectorXd r(size());
        for (Eigen::Index i = 0; i < size(); ++i)
            r[i] = amue_eval(p, t[i], m[i]) - y[i];
        return r;
    }

    // Jacobian of the residuals in the unconstrained coordinates: the
    // surface gradient in parameter space times the reparameterization
    // derivatives d(param)/du.
    Eigen::MatrixXd jacobian(const Coords& u, const AmueParams& p) const {
        const double d_azs = 100.0 * sigmoid(u[0]) * (1.0 - sigmoid(u[0]));
        const double d_at = p.a_t;
        const double d_alt =
            kAlphaMax * sigmoid(u[2]) * (1.0 - sigmoid(u[2]));
        const double d_am = p.a_m;
        const double d_alm =
            kAlphaMax * sigmoid(u[4]) * (1.0 - sigmoid(u[4]));

        Eigen::MatrixXd J(size(), kDim);
        for (Eigen::Index i = 0; i < size(); ++i) {
            const double pt = amue_pow(t[i], p.alpha_t);
            const double pm = amue_pow(m[i], p.alpha_m);
            J(i, 0) = d_azs;
            J(i, 1) = pt * d_at;
            J(i, 2) = (t[i] > 0.0 ? p.a_t * pt * std::log(t[i]) : 0.0) * d_alt;
            J(i, 3) = pm * d_am;
            J(i, 4) = (m[i] > 0.0 ? p.a_m * pm * std::log(m[i]) : 0.0) * d_alm;
        }
        return J;
    }
};

struct StartOutcome {
    Coords u;
    double sse = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
};

// Levenberg-Marquardt with multiplicative damping on the scaled normal
// equations. Returns the final coordinates, objective, and the objective
// after every accepted step.
StartOutcome run_lm(const Problem& prob, Coords u, const FitOptions& opt) {
    StartOutcome out;
    u = clamp_coords(u);
    Eigen::VectorXd r = prob.residuals(coords_to_params(u));
    double sse = r.squaredNorm();
    out.trace.push_back(sse);

    double lambda = 1e-3;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        const AmueParams p = coords_to_params(u);
        const Eigen::MatrixXd J = prob.jacobian(u, p);
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
        const Eigen::MatrixXd jtj = J.transpose() * J;
        // Floor the damping diagonal so directions with no data support
        // (e.g. a_m when every m is zero) stay regularized.
        const Eigen::VectorXd scale =
            jtj.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        while (lambda <= 1e14) {
            Eigen::MatrixXd h = jtj;
            h.diagonal() += lambda * scale;
            const Coords step = h.ldlt().solve(-g);
            const Coords u_new = clamp_coords(u + step);
            const Eigen::VectorXd r_new =
                prob.residuals(coords_to_params(u_new));
            const double sse_new = r_new.squaredNorm();
            if (std::isfinite(sse_new) && sse_new < sse) {
                const double drop = (sse - sse_new) / std::max(sse, 1e-300);
                u = u_new;
                r = r_new;
                sse = sse_new;
                out.trace.push_back(sse);
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (drop < opt.tolerance) iter = opt.max_iterations;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) break;       // damping exhausted: local minimum
        if (sse < 1e-18) break;     // interpolating fit
    }

    out.u = u;
    out.sse = sse;
    return out;
}

// Data-driven initialization: the offset from the smallest observation and
// each coefficient from the single-axis slice that isolates it.
Coords heuristic_start(const Problem& prob) {
    const double y_min = prob.y.minCoeff();
    AmueParams p;
    p.a_zs = std::clamp(y_min, 0.0, 99.0);

    auto slice_estimate = [&](const Eigen::VectorXd& x,
                              const Eigen::VectorXd& other, double& coeff,
                              double& alpha) {
        // Points with the other input absent, ordered by this input.
        std::vector<Eigen::Index> ix;
        for (Eigen::Index i = 0; i < prob.size(); ++i)
            if (other[i] == 0.0 && x[i] > 0.0 && prob.y[i] > p.a_zs)
                ix.push_back(i);
        std::sort(ix.begin(), ix.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
        alpha = 0.4;
        coeff = 0.1;
        if (ix.empty()) return;
        const Eigen::Index hi = ix.back();
        if (ix.size() >= 2 && x[ix.front()] < x[hi]) {
            const Eigen::Index lo = ix.front();
            const double est =
                std::log((prob.y[hi] - p.a_zs) / (prob.y[lo] - p.a_zs)) /
                std::log(x[hi] / x[lo]);
            if (std::isfinite(est)) alpha = std::clamp(est, 0.05, 0.9);
        }
        coeff = (prob.y[hi] - p.a_zs) / std::pow(x[hi], alpha);
    };

    slice_estimate(prob.t, prob.m, p.a_t, p.alpha_t);
    slice_estimate(prob.m, prob.t, p.a_m, p.alpha_m);
    return params_to_coords(p);
}

// One stratified Latin-hypercube draw per start over the initialization
// box; coefficients are sampled log-uniformly.
std::vector<Coords> lhs_starts(const Problem& prob, int count,
                               std::mt19937_64& rng) {
    const double y_min = prob.y.minCoeff();
    const double azs_hi = std::clamp(y_min, 1.0, 99.0);
    const std::array<std::pair<double, double>, kDim> box = {{
        {logit(0.001 / 100.0), logit(azs_hi / 100.0)}, // a_zs
        {std::log(1e-6), std::log(1e2)},               // a_t
        {logit(0.02 / kAlphaMax), logit(0.9 / kAlphaMax)}, // alpha_t
        {std::log(1e-6), std::log(1e2)},               // a_m
        {logit(0.02 / kAlphaMax), logit(0.9 / kAlphaMax)}, // alpha_m
    }};

    std::vector<std::vector<std::size_t>> strata(
        kDim, std::vector<std::size_t>(static_cast<std::size_t>(count)));
    for (auto& col : strata) {
        std::iota(col.begin(), col.end(), std::size_t{0});
        detail::shuffle_deterministic(col, rng);
    }

    std::vector<Coords> starts;
    starts.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Coords u;
        for (int d = 0; d < kDim; ++d) {
            const double cell =
                (static_cast<double>(strata[static_cast<std::size_t>(d)]
                                            [static_cast<std::size_t>(k)]) +
                 detail::unit_uniform(rng)) /
                static_cast<double>(count);
            u[d] = box[static_cast<std::size_t>(d)].first +
                   (box[static_cast<std::size_t>(d)].second -
                    box[static_cast<std::size_t>(d)].first) *
                       cell;
        }
        starts.push_back(clamp_coords(u));
    }
    return starts;
}

} // namespace

AmueFitResult fit_amue(const ObservationSet& obs, const FitOptions& options) {
    options.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(obs.size());
    if (n < 5)
        throw FitError("underdetermined fit: " + std::to_string(n) +
                       " observations for 5 parameters");

    Problem prob;
    prob.t.resize(n);
    prob.m.resize(n);
    prob.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = obs.rows[static_cast<std::size_t>(i)];
        prob.t[i] = row.t;
        prob.m[i] = row.m;
        prob.y[i] = row.pi;
    }

    const bool all_same = [&] {
        for (Eigen::Index i = 1; i < n; ++i)
            if (prob.t[i] != prob.t[0] || prob.m[i] != prob.m[0]) return false;
        return true;
    }();
    if (all_same)
        throw FitError("rank-deficient fit: every observation shares the "
                       "input (t=" +
                       std::to_string(prob.t[0]) +
                       ", m=" + std::to_string(prob.m[0]) + ")");

    std::mt19937_64 rng(options.rng_seed);
    std::vector<Coords> starts;
    starts.push_back(heuristic_start(prob));
    for (const auto& u : lhs_starts(prob, options.restarts, rng))
        starts.push_back(u);

    StartOutcome best;
    int best_index = 0;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        StartOutcome candidate = run_lm(prob, starts[k], options);
        if (candidate.sse < best.sse) {
            best = std::move(candidate);
            best_index = static_cast<int>(k);
        }
    }

    AmueFitResult result;
    result.params = coords_to_params(best.u);
    result.params.validate();
    result.objective = best.sse;
    result.objective_trace = std::move(best.trace);
    result.best_start = best_index;
    const AmueParams fitted = result.params;
    result.report = evaluate_fit(
        [fitted](double t, double m) { return amue_eval(fitted, t, m); }, obs,
        "train");
    return result;
}

} // namespace perfplan
