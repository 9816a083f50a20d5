#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfplan/errors.hpp"

namespace perfplan {

// Identifies one fine-tuning experiment family: target language, the pivot
// language whose dataset of size P is translated, and free-text labels for
// the model and task. All observations in a set share one context.
struct ExperimentContext {
    std::string language;
    std::string pivot_language;
    double pivot_size = 0.0; // examples available for translation (P)
    std::string model_label;
    std::string task_label;

    void validate() const;
    static ExperimentContext make(std::string language,
                                  std::string pivot_language,
                                  double pivot_size,
                                  std::string model_label = {},
                                  std::string task_label = {});

    friend bool operator==(const ExperimentContext&,
                           const ExperimentContext&) = default;
};

// One measured configuration: t translated and m manually-created examples
// produced performance pi (0-100). seed is present on raw per-run rows and
// absent after seed aggregation; pi_std carries the across-seed spread.
struct Observation {
    ExperimentContext context;
    double t = 0.0;
    double m = 0.0;
    std::optional<long long> seed;
    double pi = 0.0;
    std::optional<double> pi_std;

    void validate() const;

    friend bool operator==(const Observation&, const Observation&) = default;
};

// Non-empty list of observations with a homogeneous context and no
// duplicate (t, m, seed) triple.
struct ObservationSet {
    std::vector<Observation> rows;

    void validate() const;
    static ObservationSet make(std::vector<Observation> rows);

    const ExperimentContext& context() const { return rows.front().context; }
    std::size_t size() const { return rows.size(); }

    friend bool operator==(const ObservationSet&,
                           const ObservationSet&) = default;
};

// Maps the canonical column roles onto the header names used by a
// particular file. seed, f1_std, model and task columns are optional in
// the input; the rest are required.
struct ColumnSchema {
    std::string language = "language";
    std::string pivot_language = "pivot_language";
    std::string pivot_size = "pivot_size";
    std::string translated_size = "translated_size";
    std::string manual_size = "manual_size";
    std::string seed = "seed";
    std::string f1 = "f1";
    std::string f1_std = "f1_std";
    std::string model_label = "model";
    std::string task_label = "task";
};

// Applies comma-separated "role=column" overrides (e.g. "f1=F1,seed=run")
// to the canonical schema. Unknown role names throw DomainError.
ColumnSchema schema_with_overrides(ColumnSchema base, const std::string& spec);

// A data row the loader could not accept, with its 1-based line number in
// the file and the reason.
struct RowError {
    std::size_t line = 0;
    std::string message;
};

// Loader output. Every data row is accounted for: rows_total equals the
// accepted row count across sets plus rejects.size().
struct LoadResult {
    std::vector<ObservationSet> sets; // one per distinct context, sorted
    std::vector<RowError> rejects;
    std::vector<std::string> warnings;
    std::size_t rows_total = 0;
};

// Reads a delimited text file (comma or tab, sniffed from the header) and
// groups valid rows by experiment context. File-level problems (missing
// file, missing required column, no header) throw IoError; row-level
// problems are itemized in rejects. When every performance value lies in
// [0, 1] the column is rescaled by 100 with a warning.
LoadResult load_observations(const std::string& path,
                             const ColumnSchema& schema = {});

// Writes sets in the same delimited format load_observations reads, with
// full round-trip precision. Optional columns appear only when some row
// carries the field.
void write_observations(const std::string& path,
                        const std::vector<ObservationSet>& sets,
                        const ColumnSchema& schema = {});

// Collapses repeated (t, m) measurements across seeds into their mean,
// recording the sample standard deviation in pi_std. Rows that are already
// unique pass through unchanged (minus the seed), so the operation is
// idempotent. Output is sorted by (t, m).
ObservationSet aggregate_seeds(const ObservationSet& obs);

} // namespace perfplan
