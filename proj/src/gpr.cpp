#include "perfplan/gpr.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "perfplan/detail/random_util.hpp"

namespace perfplan {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

// Per-dimension length scales for the kernel math; a shared scale is
// expanded to both input dimensions.
Eigen::Vector2d expand_scales(const Eigen::VectorXd& log_theta) {
    const Eigen::Index d_ls = log_theta.size() - 2;
    Eigen::Vector2d ls;
    ls[0] = std::exp(log_theta[0]);
    ls[1] = std::exp(log_theta[d_ls == 2 ? 1 : 0]);
    return ls;
}

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& x, const Eigen::Vector2d& ls,
                           double signal_var) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = signal_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d0 = (x(i, 0) - x(j, 0)) / ls[0];
            const double d1 = (x(i, 1) - x(j, 1)) / ls[1];
            k(i, j) = k(j, i) =
                signal_var * std::exp(-0.5 * (d0 * d0 + d1 * d1));
        }
    }
    return k;
}

} // namespace

double gpr_log_marginal(const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets,
                        const Eigen::VectorXd& log_theta,
                        Eigen::VectorXd* gradient) {
    const Eigen::Index n = targets.size();
    const Eigen::Index dim = log_theta.size();
    if (dim != 3 && dim != 4)
        throw DomainError("kernel hyperparameter vector must have 3 or 4 "
                          "entries");
    if (inputs.rows() != n || inputs.cols() != 2)
        throw DomainError("kernel inputs must be n x 2 and match targets");

    const Eigen::Index d_ls = dim - 2;
    const Eigen::Vector2d ls = expand_scales(log_theta);
    const double signal_var = std::exp(log_theta[d_ls]);
    const double noise_var = std::exp(log_theta[d_ls + 1]);

    const Eigen::MatrixXd k_rbf = rbf_matrix(inputs, ls, signal_var);
    Eigen::MatrixXd k = k_rbf;
    k.diagonal().array() += noise_var;

    const Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        if (gradient) gradient->setZero(dim);
        return -std::numeric_limits<double>::infinity();
    }

    const Eigen::VectorXd alpha = llt.solve(targets);
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        log_det_half += std::log(llt.matrixLLT()(i, i));
    const double lml = -0.5 * targets.dot(alpha) - log_det_half -
                       0.5 * static_cast<double>(n) * kLogTwoPi;

    if (gradient) {
        gradient->resize(dim);
        // d lml / d theta_j = 0.5 tr((alpha alpha^T - K^-1) dK/d theta_j)
        const Eigen::MatrixXd w =
            alpha * alpha.transpose() -
            llt.solve(Eigen::MatrixXd::Identity(n, n));
        for (Eigen::Index d = 0; d < d_ls; ++d) {
            Eigen::MatrixXd dk(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                dk(i, i) = 0.0;
                for (Eigen::Index j = 0; j < i; ++j) {
                    double r2 = 0.0;
                    if (d_ls == 1) {
                        const double d0 = (inputs(i, 0) - inputs(j, 0)) / ls[0];
                        const double d1 = (inputs(i, 1) - inputs(j, 1)) / ls[1];
                        r2 = d0 * d0 + d1 * d1;
                    } else {
                        const double dd =
                            (inputs(i, d) - inputs(j, d)) / ls[d];
                        r2 = dd * dd;
                    }
                    dk(i, j) = dk(j, i) = k_rbf(i, j) * r2;
                }
            }
            (*gradient)[d] = 0.5 * w.cwiseProduct(dk).sum();
        }
        (*gradient)[d_ls] = 0.5 * w.cwiseProduct(k_rbf).sum();
        (*gradient)[d_ls + 1] = 0.5 * noise_var * w.trace();
    }
    return lml;
}

namespace {

Eigen::VectorXd project_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                            const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

struct CurvaturePair {
    Eigen::VectorXd s, y;
    double rho = 0.0;
};

// Two-loop recursion over the stored curvature pairs; falls back to the
// bare gradient when the history is empty.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& grad,
                                const std::deque<CurvaturePair>& history) {
    Eigen::VectorXd q = grad;
    std::vector<double> a(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
        a[i] = history[i].rho * history[i].s.dot(q);
        q -= a[i] * history[i].y;
    }
    if (!history.empty()) {
        const auto& last = history.back();
        q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
        const double b = history[i].rho * history[i].y.dot(q);
        q += (a[i] - b) * history[i].s;
    }
    return -q;
}

struct BoxMinimum {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
};

// Box-constrained quasi-Newton descent: L-BFGS directions with projected
// backtracking line search, history reset when a step stops helping.
template <typename F>
BoxMinimum lbfgs_box_min(const F& objective, Eigen::VectorXd x0,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         int max_iterations, double f_tol) {
    constexpr std::size_t kHistory = 8;
    Eigen::VectorXd x = project_box(std::move(x0), lo, hi);
    Eigen::VectorXd g(x.size());
    double f = objective(x, g);
    std::deque<CurvaturePair> history;

    for (int iter = 0; iter < max_iterations; ++iter) {
        const Eigen::VectorXd pg = x - project_box(x - g, lo, hi);
        if (pg.lpNorm<Eigen::Infinity>() < 1e-9 * std::max(1.0, std::fabs(f)))
            break;

        Eigen::VectorXd dir = lbfgs_direction(g, history);
        if (dir.dot(g) >= 0.0) { // not a descent direction: restart
            history.clear();
            dir = -g;
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new, g_new;
        double f_new = f;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = project_box(x + step * dir, lo, hi);
            const Eigen::VectorXd move = x_new - x;
            if (move.lpNorm<Eigen::Infinity>() < 1e-16) break;
            g_new.resize(x.size());
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(move)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (history.empty()) break; // converged as far as we can tell
            history.clear();            // retry from steepest descent
            continue;
        }

        CurvaturePair pair{x_new - x, g_new - g, 0.0};
        const double sy = pair.s.dot(pair.y);
        if (sy > 1e-12) {
            pair.rho = 1.0 / sy;
            history.push_back(std::move(pair));
            if (history.size() > kHistory) history.pop_front();
        }
        const double drop = f - f_new;
        x = std::move(x_new);
        g = std::move(g_new);
        f = f_new;
        if (drop < f_tol * std::max(1.0, std::fabs(f))) break;
    }
    return {std::move(x), f};
}

} // namespace

GprModel fit_gpr(const ObservationSet& obs, const FitOptions& options) {
    options.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(obs.size());

    Eigen::MatrixXd raw(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = obs.rows[static_cast<std::size_t>(i)];
        raw(i, 0) = row.t;
        raw(i, 1) = row.m;
        y[i] = row.pi;
    }

    const double input_scale = std::max(raw.maxCoeff(), 1.0);
    const Eigen::MatrixXd x = raw / input_scale;
    const double mean = y.mean();
    const Eigen::VectorXd yc = y.array() - mean;
    // Reference variance for the hyperparameter box; constant targets get
    // an absolute fallback so the bounds stay meaningful.
    double var_ref = yc.squaredNorm() / static_cast<double>(n);
    if (var_ref < 1e-12) var_ref = 1.0;
    const double noise_floor = 1e-6 * var_ref;

    const Eigen::Index dim = options.per_dimension_length_scales ? 4 : 3;
    const Eigen::Index d_ls = dim - 2;
    Eigen::VectorXd lo(dim), hi(dim);
    for (Eigen::Index d = 0; d < d_ls; ++d) {
        lo[d] = std::log(1e-2);
        hi[d] = std::log(1e2);
    }
    lo[d_ls] = std::log(1e-2 * var_ref);
    hi[d_ls] = std::log(1e2 * var_ref);
    lo[d_ls + 1] = std::log(noise_floor);
    hi[d_ls + 1] = std::log(1e2 * var_ref);

    const auto objective = [&](const Eigen::VectorXd& theta,
                               Eigen::VectorXd& grad) {
        Eigen::VectorXd lml_grad;
        const double lml = gpr_log_marginal(x, yc, theta, &lml_grad);
        grad = -lml_grad;
        return -lml;
    };

    std::mt19937_64 rng(options.rng_seed);
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd theta0(dim);
    for (Eigen::Index d = 0; d < d_ls; ++d) theta0[d] = 0.0; // scale 1
    theta0[d_ls] = std::log(var_ref);
    theta0[d_ls + 1] = std::log(std::max(1e-2 * var_ref, noise_floor));
    starts.push_back(theta0);
    for (int k = 0; k < options.restarts; ++k) {
        Eigen::VectorXd theta(dim);
        for (Eigen::Index d = 0; d < dim; ++d)
            theta[d] = detail::uniform_in(rng, lo[d], hi[d]);
        starts.push_back(theta);
    }

    BoxMinimum best;
    for (const auto& start : starts) {
        const BoxMinimum candidate = lbfgs_box_min(
            objective, start, lo, hi, options.max_iterations,
            options.tolerance);
        if (candidate.f < best.f) best = candidate;
    }
    if (!std::isfinite(best.f))
        throw FitError("hyperparameter search found no factorizable kernel "
                       "system");

    const Eigen::VectorXd theta = best.x;
    const Eigen::Vector2d ls = expand_scales(theta);
    const double signal_var = std::exp(theta[d_ls]);
    double noise_var = std::max(std::exp(theta[d_ls + 1]), noise_floor);

    const Eigen::MatrixXd k_rbf = rbf_matrix(x, ls, signal_var);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (;; noise_var *= 10.0) {
        Eigen::MatrixXd k = k_rbf;
        k.diagonal().array() += noise_var;
        llt.compute(k);
        if (llt.info() == Eigen::Success) break;
        if (noise_var > 1e-2 * var_ref)
            throw FitError("kernel system is ill-conditioned even at the "
                           "maximum noise floor");
    }

    GprModel model;
    model.length_scale.resize(d_ls);
    for (Eigen::Index d = 0; d < d_ls; ++d)
        model.length_scale[d] = std::exp(theta[d]);
    model.signal_variance = signal_var;
    model.noise_variance = noise_var;
    model.input_scale = input_scale;
    model.target_mean = mean;
    model.training_inputs = x;
    model.dual_weights = llt.solve(yc);
    model.chol_factor = Eigen::MatrixXd(llt.matrixL());
    Eigen::VectorXd theta_final = theta;
    theta_final[d_ls + 1] = std::log(noise_var);
    model.log_marginal = gpr_log_marginal(x, yc, theta_final);
    return model;
}

std::pair<double, double> gpr_predict(const GprModel& model, double t,
                                      double m) {
    const Eigen::Index n = model.training_inputs.rows();
    const bool shared = model.length_scale.size() == 1;
    const double ls0 = model.length_scale[0];
    const double ls1 = shared ? ls0 : model.length_scale[1];
    const double x0 = t / model.input_scale;
    const double x1 = m / model.input_scale;

    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d0 = (x0 - model.training_inputs(i, 0)) / ls0;
        const double d1 = (x1 - model.training_inputs(i, 1)) / ls1;
        k_star[i] =
            model.signal_variance * std::exp(-0.5 * (d0 * d0 + d1 * d1));
    }

    const double mean = model.target_mean + k_star.dot(model.dual_weights);
    const Eigen::VectorXd v =
        model.chol_factor.triangularView<Eigen::Lower>().solve(k_star);
    const double var = std::max(
        model.signal_variance - v.squaredNorm() + model.noise_variance, 0.0);
    return {mean, var};
}

} // namespace perfplan
