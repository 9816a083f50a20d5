#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfplan/amue.hpp"
#include "perfplan/amue_fit.hpp"

namespace perfplan {

// One fully resolved invocation: which command to run and every knob it
// needs. Values come from built-in defaults, then an optional JSON config
// file, then command-line flags — later layers win.
struct RunConfig {
    std::string command; // fit | evaluate | expansion-path | isoperf | cost-curve
    std::string input_path;
    std::string schema_spec;          // "role=header" pairs, comma-separated
    double c_t = 0.007;               // per-example translation cost
    std::optional<double> c_m;        // per-example manual cost
    std::optional<double> cost_ratio; // c_t / c_m, alternative to c_m
    std::optional<double> p_max;      // overrides the per-set pivot size
    std::vector<double> levels;       // explicit performance levels
    std::string model = "amue";       // amue | gpr | both
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double split_fraction = 0.8;      // evaluate: train share
    int restarts = 10;

    void validate() const;
    bool wants_amue() const { return model == "amue" || model == "both"; }
    bool wants_gpr() const { return model == "gpr" || model == "both"; }

    // Requires exactly one of c_m / cost_ratio; throws DomainError
    // otherwise.
    CostModel cost_model() const;
    FitOptions fit_options() const;
};

// Overlays key/value pairs from a JSON config file onto config. Unknown
// keys or wrong types throw DomainError; an unreadable file throws
// IoError.
void apply_config_file(RunConfig& config, const std::string& path);

struct CommandResult {
    std::vector<std::string> files_written; // absolute or out_dir-relative
    std::vector<std::string> warnings;
};

// Each command loads the input, works per (language, pivot) set, and
// writes its reports under out_dir. All outputs are buffered and written
// together at the end, so a failure leaves no partial files behind.
CommandResult cmd_fit(const RunConfig& config);
CommandResult cmd_evaluate(const RunConfig& config);
CommandResult cmd_expansion_path(const RunConfig& config);
CommandResult cmd_isoperf(const RunConfig& config);
CommandResult cmd_cost_curve(const RunConfig& config);

// Parses argv and dispatches. Errors go to stderr; returns the process
// exit code (0 only when every output was written).
int run_cli(int argc, const char* const* argv);

} // namespace perfplan
