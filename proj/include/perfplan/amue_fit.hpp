#pragma once

#include <cstdint>
#include <vector>

#include "perfplan/amue.hpp"
#include "perfplan/fit_report.hpp"
#include "perfplan/observations.hpp"

namespace perfplan {

// Shared estimator settings. tolerance is the relative objective-decrease
// threshold under which an accepted iteration counts as converged.
struct FitOptions {
    int max_iterations = 200;
    double tolerance = 1e-10;
    int restarts = 10;
    std::uint64_t rng_seed = 0;
    // Nonparametric model only: one kernel length scale per input
    // dimension instead of a single shared scale.
    bool per_dimension_length_scales = false;

    void validate() const;
};

struct AmueFitResult {
    AmueParams params;
    FitReport report;   // goodness of fit on the full training input
    double objective = 0.0; // sum of squared residuals at the optimum
    // Objective after each accepted step of the winning start; strictly
    // the initial value followed by a non-increasing sequence.
    std::vector<double> objective_trace;
    int best_start = 0;
};

// Least-squares fit of the additive performance surface. The bounded
// parameters are optimized through smooth reparameterizations (coefficients
// via exp, the exponents and offset via scaled logistic maps), so the
// returned parameters always satisfy the AmueParams invariants. Runs one
// data-driven start plus `restarts` Latin-hypercube starts and keeps the
// best final objective; deterministic given rng_seed.
//
// Throws FitError for fewer than 5 observations (more parameters than
// data) or when every observation shares one (t, m) input.
AmueFitResult fit_amue(const ObservationSet& obs,
                       const FitOptions& options = {});

} // namespace perfplan
