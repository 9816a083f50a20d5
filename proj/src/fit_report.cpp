#include "perfplan/fit_report.hpp"

#include <cmath>
#include <numeric>

#include "perfplan/detail/random_util.hpp"

namespace perfplan {

FinetuneSetup classify_setup(double t, double m) {
    if (t > 0.0)
        return m > 0.0 ? FinetuneSetup::kCombined
                       : FinetuneSetup::kTranslateTrain;
    return m > 0.0 ? FinetuneSetup::kFewShot : FinetuneSetup::kZeroShot;
}

namespace {

struct Accumulator {
    std::size_t n = 0;
    double sum_y = 0.0;
    double sum_y2 = 0.0;
    double ss_res = 0.0;

    void add(double y, double pred) {
        ++n;
        sum_y += y;
        sum_y2 += y * y;
        const double e = pred - y;
        ss_res += e * e;
    }

    double rmse() const {
        return n ? std::sqrt(ss_res / static_cast<double>(n)) : 0.0;
    }

    std::optional<double> r2() const {
        if (!n) return std::nullopt;
        const double mean = sum_y / static_cast<double>(n);
        const double ss_tot = sum_y2 - static_cast<double>(n) * mean * mean;
        if (!(ss_tot > 0.0)) return std::nullopt; // constant targets
        return 1.0 - ss_res / ss_tot;
    }
};

} // namespace

FitReport evaluate_fit(const Predictor& predict, const ObservationSet& obs,
                       std::string split_label) {
    Accumulator overall;
    std::array<Accumulator, 4> per_setup{};
    for (const auto& row : obs.rows) {
        const double pred = predict(row.t, row.m);
        overall.add(row.pi, pred);
        per_setup[static_cast<std::size_t>(classify_setup(row.t, row.m))].add(
            row.pi, pred);
    }

    FitReport report;
    report.split = std::move(split_label);
    report.count = overall.n;
    report.rmse = overall.rmse();
    report.r2 = overall.r2();
    for (std::size_t k = 0; k < per_setup.size(); ++k) {
        report.by_setup[k].count = per_setup[k].n;
        report.by_setup[k].rmse = per_setup[k].rmse();
        report.by_setup[k].r2 = per_setup[k].r2();
    }
    return report;
}

std::pair<ObservationSet, ObservationSet> split_train_test(
    const ObservationSet& obs, double train_fraction, std::uint64_t rng_seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw DomainError("train fraction must lie strictly in (0, 1)");
    const std::size_t n = obs.size();
    if (n < 2)
        throw DomainError("need at least 2 observations to split, got " +
                          std::to_string(n));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(rng_seed);
    detail::shuffle_deterministic(order, rng);

    auto n_train = static_cast<std::size_t>(std::floor(
        static_cast<double>(n) * train_fraction + 0.5));
    n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

    std::vector<Observation> train, test;
    train.reserve(n_train);
    test.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? train : test).push_back(obs.rows[order[i]]);
    return {ObservationSet::make(std::move(train)),
            ObservationSet::make(std::move(test))};
}

} // namespace perfplan
