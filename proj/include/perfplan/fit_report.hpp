#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "perfplan/observations.hpp"

namespace perfplan {

// Rows are broken down by which kinds of data the configuration used.
enum class FinetuneSetup {
    kZeroShot = 0,       // t = 0, m = 0
    kTranslateTrain = 1, // t > 0, m = 0
    kFewShot = 2,        // t = 0, m > 0
    kCombined = 3,       // t > 0, m > 0
};

inline constexpr std::array<const char*, 4> kSetupLabels = {
    "zero-shot", "translate-train", "few-shot", "combined"};

inline const char* setup_label(FinetuneSetup s) {
    return kSetupLabels[static_cast<std::size_t>(s)];
}

FinetuneSetup classify_setup(double t, double m);

struct SetupStats {
    std::size_t count = 0;
    double rmse = 0.0;
    std::optional<double> r2; // absent when the targets have no variance
};

// Goodness of fit of one predictor on one split, overall and per setup.
// Setup counts always sum to count.
struct FitReport {
    std::string split = "all";
    std::size_t count = 0;
    double rmse = 0.0;
    std::optional<double> r2;
    std::array<SetupStats, 4> by_setup{}; // indexed by FinetuneSetup
};

// Any performance predictor over (t, m); closed-form and nonparametric
// models both reduce to this shape for evaluation.
using Predictor = std::function<double(double t, double m)>;

FitReport evaluate_fit(const Predictor& predict, const ObservationSet& obs,
                       std::string split_label = "all");

// Deterministic shuffled split. The train side gets round(n * fraction)
// rows, clamped so both sides are non-empty; fewer than 2 rows cannot be
// split and throw DomainError.
std::pair<ObservationSet, ObservationSet> split_train_test(
    const ObservationSet& obs, double train_fraction, std::uint64_t rng_seed);

} // namespace perfplan
