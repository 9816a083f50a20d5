#pragma once

#include <Eigen/Dense>

#include <utility>

#include "perfplan/amue_fit.hpp"
#include "perfplan/observations.hpp"

namespace perfplan {

// Gaussian-process surrogate for the performance surface: an RBF kernel
// plus a constant (white) noise term, fitted by maximizing the log
// marginal likelihood over bounded log-hyperparameters. Inputs are stored
// divided by input_scale; targets are modeled around their mean.
struct GprModel {
    Eigen::VectorXd length_scale; // one shared entry, or one per dimension
    double signal_variance = 0.0;
    double noise_variance = 0.0;
    double input_scale = 1.0;  // raw (t, m) are divided by this
    double target_mean = 0.0;  // prior mean of the process
    double log_marginal = 0.0; // at the fitted hyperparameters

    Eigen::MatrixXd training_inputs; // n x 2, already normalized
    Eigen::VectorXd dual_weights;    // (K + noise I)^-1 (y - mean)
    Eigen::MatrixXd chol_factor;     // lower L with L L^T = K + noise I
};

// Maximum-marginal-likelihood fit with `restarts` random initializations
// plus one default start; deterministic given options.rng_seed. The noise
// variance is kept above 1e-6 of the target variance; if the kernel system
// cannot be factorized even after escalating that floor tenfold up to 1e-2
// of the target variance, throws FitError.
GprModel fit_gpr(const ObservationSet& obs, const FitOptions& options = {});

// Posterior mean and variance at raw (t, m). The variance includes the
// fitted noise term, so far from all data it approaches signal_variance +
// noise_variance, and at a training input it collapses to the noise level.
std::pair<double, double> gpr_predict(const GprModel& model, double t,
                                      double m);

// Log marginal likelihood of a zero-mean RBF + white-noise process on
// (inputs, targets), with optional gradient. log_theta packs the
// log-hyperparameters [log l_1 (, log l_2), log signal_var, log noise_var];
// its length (3 or 4) selects shared or per-dimension length scales. An
// indefinite kernel system yields -infinity. Exposed for gradient
// verification and diagnostics.
double gpr_log_marginal(const Eigen::MatrixXd& inputs,
                        const Eigen::VectorXd& targets,
                        const Eigen::VectorXd& log_theta,
                        Eigen::VectorXd* gradient = nullptr);

} // namespace perfplan
