#include "perfplan/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfplan/contours.hpp"
#include "perfplan/errors.hpp"
#include "perfplan/fit_report.hpp"
#include "perfplan/gpr.hpp"
#include "perfplan/observations.hpp"
#include "perfplan/planner.hpp"
#include "perfplan/svg_render.hpp"

namespace perfplan {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// "sw_P3696": filesystem-safe set identifier.
std::string file_tag(const ExperimentContext& ctx) {
    std::string lang;
    for (const char c : ctx.language)
        lang += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    char pivot[32];
    std::snprintf(pivot, sizeof(pivot), "%.0f", ctx.pivot_size);
    return lang + "_P" + pivot;
}

std::string set_label(const ExperimentContext& ctx) {
    char pivot[32];
    std::snprintf(pivot, sizeof(pivot), "%.0f", ctx.pivot_size);
    return ctx.language + " (P=" + pivot + ")";
}

// Loads, surfaces loader warnings and per-row rejects, and averages
// repeated seeds so each (t, m) enters the fits once.
std::vector<ObservationSet> load_input(const RunConfig& config,
                                       CommandResult& result) {
    ColumnSchema schema;
    if (!config.schema_spec.empty())
        schema = schema_with_overrides(schema, config.schema_spec);
    auto loaded = load_observations(config.input_path, schema);
    for (auto& warning : loaded.warnings)
        result.warnings.push_back(std::move(warning));
    for (const auto& reject : loaded.rejects)
        result.warnings.push_back("line " + std::to_string(reject.line) +
                                  " rejected: " + reject.message);
    if (loaded.sets.empty())
        throw IoError("no usable rows in " + config.input_path);
    std::vector<ObservationSet> sets;
    sets.reserve(loaded.sets.size());
    for (const auto& set : loaded.sets) sets.push_back(aggregate_seeds(set));
    return sets;
}

// Default ladder: 12 levels from just above the zero-shot floor up to
// the 95th percentile of observed performance.
std::vector<double> default_levels(double floor_pi,
                                   const ObservationSet& obs) {
    std::vector<double> pis;
    pis.reserve(obs.size());
    for (const auto& row : obs.rows) pis.push_back(row.pi);
    std::sort(pis.begin(), pis.end());
    const std::size_t rank = (pis.size() * 95 + 99) / 100; // ceil(0.95 n)
    double hi = pis[std::min(rank, pis.size()) - 1];
    const double lo = floor_pi + 1.0;
    if (hi < lo + 0.5) hi = lo + 0.5;
    std::vector<double> levels(12);
    for (int i = 0; i < 12; ++i) levels[i] = lo + (hi - lo) * i / 11.0;
    return levels;
}

ordered_json context_json(const ObservationSet& set) {
    const auto& ctx = set.context();
    ordered_json row;
    row["language"] = ctx.language;
    row["pivot_language"] = ctx.pivot_language;
    row["pivot_size"] = ctx.pivot_size;
    if (!ctx.model_label.empty()) row["model_label"] = ctx.model_label;
    if (!ctx.task_label.empty()) row["task_label"] = ctx.task_label;
    row["n_observations"] = set.size();
    return row;
}

ordered_json report_json(const FitReport& report) {
    ordered_json out;
    out["split"] = report.split;
    out["count"] = report.count;
    out["rmse"] = report.rmse;
    if (report.r2)
        out["r2"] = *report.r2;
    else
        out["r2"] = nullptr;
    ordered_json setups = ordered_json::array();
    for (std::size_t i = 0; i < report.by_setup.size(); ++i) {
        const auto& s = report.by_setup[i];
        ordered_json entry;
        entry["setup"] = kSetupLabels[i];
        entry["count"] = s.count;
        entry["rmse"] = s.rmse;
        if (s.r2)
            entry["r2"] = *s.r2;
        else
            entry["r2"] = nullptr;
        setups.push_back(std::move(entry));
    }
    out["by_setup"] = std::move(setups);
    return out;
}

ordered_json params_json(const AmueParams& p) {
    ordered_json out;
    out["a_zs"] = p.a_zs;
    out["a_t"] = p.a_t;
    out["alpha_t"] = p.alpha_t;
    out["a_m"] = p.a_m;
    out["alpha_m"] = p.alpha_m;
    return out;
}

ordered_json gpr_json(const GprModel& model) {
    ordered_json out;
    ordered_json scales = ordered_json::array();
    for (Eigen::Index i = 0; i < model.length_scale.size(); ++i)
        scales.push_back(model.length_scale[i] * model.input_scale);
    out["length_scale"] = std::move(scales);
    out["signal_variance"] = model.signal_variance;
    out["noise_variance"] = model.noise_variance;
    out["log_marginal"] = model.log_marginal;
    return out;
}

Predictor gpr_predictor(const GprModel& model) {
    return [&model](double t, double m) {
        return gpr_predict(model, t, m).first;
    };
}

ordered_json report_header(const RunConfig& config, const char* command) {
    ordered_json doc;
    doc["command"] = command;
    doc["input"] = config.input_path;
    doc["model"] = config.model;
    doc["seed"] = config.seed;
    return doc;
}

// Buffers every output, then writes them all; any failure removes what
// was already on disk so a failed run leaves no partial outputs.
void write_outputs(const RunConfig& config,
                   std::vector<std::pair<std::string, std::string>> outputs,
                   CommandResult& result) {
    const fs::path dir = config.out_dir.empty() ? "." : config.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + dir.string() +
                      "': " + ec.message());
    std::vector<std::string> written;
    for (const auto& [name, content] : outputs) {
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out) {
            out << content;
            out.flush();
        }
        if (!out) {
            out.close();
            fs::remove(path, ec);
            for (const auto& prev : written) fs::remove(fs::path(prev), ec);
            throw IoError("failed to write " + path.string());
        }
        written.push_back(path.string());
    }
    result.files_written = std::move(written);
}

double max_observed_t(const ObservationSet& set) {
    double v = 0.0;
    for (const auto& row : set.rows) v = std::max(v, row.t);
    return v;
}

double max_observed_m(const ObservationSet& set) {
    double v = 0.0;
    for (const auto& row : set.rows) v = std::max(v, row.m);
    return v;
}

} // namespace

void RunConfig::validate() const {
    if (input_path.empty())
        throw DomainError("an input file is required (--input)");
    if (!std::isfinite(c_t) || c_t <= 0.0)
        throw DomainError("--ct must be positive");
    if (c_m && (!std::isfinite(*c_m) || *c_m <= 0.0))
        throw DomainError("--cm must be positive");
    if (cost_ratio && (!std::isfinite(*cost_ratio) || *cost_ratio <= 0.0))
        throw DomainError("--cost-ratio must be positive");
    if (p_max && (!std::isfinite(*p_max) || *p_max <= 0.0))
        throw DomainError("--pmax must be positive");
    if (model != "amue" && model != "gpr" && model != "both")
        throw DomainError("--model must be amue, gpr, or both");
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0))
        throw DomainError("--split must lie in (0, 1)");
    if (restarts < 0) throw DomainError("--restarts must be non-negative");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!std::isfinite(levels[i]))
            throw DomainError("--levels must be finite");
        if (i && levels[i] <= levels[i - 1])
            throw DomainError("--levels must be strictly increasing");
    }
}

CostModel RunConfig::cost_model() const {
    if (c_m.has_value() == cost_ratio.has_value())
        throw DomainError(
            "exactly one of --cm or --cost-ratio is required with --ct");
    if (c_m) return CostModel::make(c_t, *c_m);
    return CostModel::make(c_t, c_t / *cost_ratio);
}

FitOptions RunConfig::fit_options() const {
    FitOptions options;
    options.restarts = restarts;
    options.rng_seed = seed;
    return options;
}

void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("config file " + path + ": " + e.what());
    }
    if (!doc.is_object())
        throw DomainError("config file " + path + ": root must be an object");
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "input")
                config.input_path = value.get<std::string>();
            else if (key == "schema")
                config.schema_spec = value.get<std::string>();
            else if (key == "ct")
                config.c_t = value.get<double>();
            else if (key == "cm")
                config.c_m = value.get<double>();
            else if (key == "cost_ratio")
                config.cost_ratio = value.get<double>();
            else if (key == "pmax")
                config.p_max = value.get<double>();
            else if (key == "model")
                config.model = value.get<std::string>();
            else if (key == "seed")
                config.seed = value.get<std::uint64_t>();
            else if (key == "out_dir")
                config.out_dir = value.get<std::string>();
            else if (key == "levels")
                config.levels = value.get<std::vector<double>>();
            else if (key == "split")
                config.split_fraction = value.get<double>();
            else if (key == "restarts")
                config.restarts = value.get<int>();
            else
                throw DomainError("config file " + path +
                                  ": unknown key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("config file " + path + ": " + e.what());
    }
}

CommandResult cmd_fit(const RunConfig& config) {
    config.validate();
    CommandResult result;
    const auto sets = load_input(config, result);
    ordered_json rows = ordered_json::array();
    for (const auto& set : sets) {
        ordered_json row = context_json(set);
        if (config.wants_amue()) {
            const auto fit = fit_amue(set, config.fit_options());
            ordered_json block = params_json(fit.params);
            block["objective"] = fit.objective;
            block["fit"] = report_json(fit.report);
            row["amue"] = std::move(block);
        }
        if (config.wants_gpr()) {
            const auto model = fit_gpr(set, config.fit_options());
            ordered_json block = gpr_json(model);
            block["fit"] =
                report_json(evaluate_fit(gpr_predictor(model), set, "train"));
            row["gpr"] = std::move(block);
        }
        rows.push_back(std::move(row));
    }
    ordered_json doc = report_header(config, "fit");
    doc["rows"] = std::move(rows);
    write_outputs(config, {{"fit_report.json", doc.dump(2) + "\n"}}, result);
    return result;
}

CommandResult cmd_evaluate(const RunConfig& config) {
    config.validate();
    CommandResult result;
    const auto sets = load_input(config, result);
    ordered_json rows = ordered_json::array();
    for (const auto& set : sets) {
        const auto [train, test] =
            split_train_test(set, config.split_fraction, config.seed);
        ordered_json row = context_json(set);
        row["n_train"] = train.size();
        row["n_test"] = test.size();
        if (config.wants_amue()) {
            const auto fit = fit_amue(train, config.fit_options());
            ordered_json block;
            block["params"] = params_json(fit.params);
            block["train"] = report_json(fit.report);
            const auto& p = fit.params;
            block["test"] = report_json(evaluate_fit(
                [&p](double t, double m) { return amue_eval(p, t, m); }, test,
                "test"));
            row["amue"] = std::move(block);
        }
        if (config.wants_gpr()) {
            const auto model = fit_gpr(train, config.fit_options());
            ordered_json block;
            block["hyperparameters"] = gpr_json(model);
            block["train"] = report_json(
                evaluate_fit(gpr_predictor(model), train, "train"));
            block["test"] =
                report_json(evaluate_fit(gpr_predictor(model), test, "test"));
            row["gpr"] = std::move(block);
        }
        rows.push_back(std::move(row));
    }
    ordered_json doc = report_header(config, "evaluate");
    doc["split"] = config.split_fraction;
    doc["rows"] = std::move(rows);
    write_outputs(config, {{"evaluation_report.json", doc.dump(2) + "\n"}},
                  result);
    return result;
}

CommandResult cmd_expansion_path(const RunConfig& config) {
    config.validate();
    const auto cm = config.cost_model();
    CommandResult result;
    const auto sets = load_input(config, result);
    std::vector<std::pair<std::string, std::string>> outputs;
    for (const auto& set : sets) {
        const auto tag = file_tag(set.context());
        const auto fit = fit_amue(set, config.fit_options());
        const auto& params = fit.params;
        const auto region = RealizableRegion::make(
            config.p_max.value_or(set.context().pivot_size));
        const auto levels = config.levels.empty()
                                ? default_levels(params.a_zs, set)
                                : config.levels;
        if (params.t_term_degenerate())
            result.warnings.push_back(
                set_label(set.context()) +
                ": translated term is degenerate; expansion path runs along "
                "T = 0");
        const auto path = trace_expansion_path(params, cm, region, levels);

        std::string csv = "level,t,m,pi,cost,on_boundary\n";
        for (std::size_t i = 0; i < path.size(); ++i) {
            csv += fmt17(levels[i]) + "," + fmt17(path[i].t) + "," +
                   fmt17(path[i].m) + "," + fmt17(path[i].pi) + "," +
                   fmt17(path[i].cost) + "," +
                   (path[i].on_boundary ? "true" : "false") + "\n";
        }

        TmDiagramSpec spec;
        double t_axis = std::max({1.0, max_observed_t(set)});
        double m_axis = std::max({1.0, max_observed_m(set)});
        for (const auto& pt : path) {
            t_axis = std::max(t_axis, pt.t);
            m_axis = std::max(m_axis, pt.m);
        }
        spec.t_max = 1.25 * t_axis;
        spec.m_max = 1.25 * m_axis;
        spec.region = region;
        spec.guide_mt_line = true;
        spec.title = "expansion path - " + set_label(set.context());
        std::vector<double> grid(201);
        for (int i = 0; i < 201; ++i) grid[i] = spec.t_max * i / 200.0;
        for (const double level : levels) {
            try {
                spec.contours.push_back(
                    amue_isoperf_contour(params, level, grid));
            } catch (const InfeasibleError&) {
                result.warnings.push_back(
                    set_label(set.context()) + ": no contour at level " +
                    fmt_short(level) + " inside the plotted range");
            }
        }
        for (const auto& pt : path)
            spec.isocosts.push_back(
                {-cm.cost_ratio(), pt.m + cm.cost_ratio() * pt.t});
        spec.path = path;

        outputs.emplace_back("path_" + tag + ".csv", csv);
        outputs.emplace_back("path_" + tag + ".svg", render_tm_diagram(spec));
    }
    write_outputs(config, std::move(outputs), result);
    return result;
}

CommandResult cmd_isoperf(const RunConfig& config) {
    config.validate();
    CommandResult result;
    const auto sets = load_input(config, result);
    std::vector<std::pair<std::string, std::string>> outputs;
    for (const auto& set : sets) {
        const auto tag = file_tag(set.context());
        const double t_axis =
            config.p_max.value_or(set.context().pivot_size);
        const double m_axis = 1.25 * std::max(1.0, max_observed_m(set));

        std::optional<AmueFitResult> amue_fit_result;
        if (config.wants_amue())
            amue_fit_result = fit_amue(set, config.fit_options());

        std::vector<double> levels = config.levels;
        if (levels.empty()) {
            double floor_pi;
            if (amue_fit_result) {
                floor_pi = amue_fit_result->params.a_zs;
            } else {
                floor_pi = set.rows.front().pi;
                for (const auto& row : set.rows)
                    floor_pi = std::min(floor_pi, row.pi);
            }
            levels = default_levels(floor_pi, set);
        }

        std::vector<Contour> contours;
        if (amue_fit_result) {
            std::vector<double> grid(201);
            for (int i = 0; i < 201; ++i) grid[i] = t_axis * i / 200.0;
            for (const double level : levels) {
                try {
                    contours.push_back(amue_isoperf_contour(
                        amue_fit_result->params, level, grid));
                } catch (const InfeasibleError&) {
                    result.warnings.push_back(
                        set_label(set.context()) +
                        ": no closed-form contour at level " +
                        fmt_short(level) + " inside the plotted range");
                }
            }
        }
        if (config.wants_gpr()) {
            const auto model = fit_gpr(set, config.fit_options());
            const auto grid_spec = GridSpec::make(t_axis, m_axis, 200, 200);
            for (const double level : levels) {
                const auto pieces =
                    gpr_isoperf_contour(model, level, grid_spec);
                if (pieces.empty())
                    result.warnings.push_back(
                        set_label(set.context()) +
                        ": no posterior contour at level " +
                        fmt_short(level) + " inside the plotted range");
                for (const auto& piece : pieces) contours.push_back(piece);
            }
        }

        std::string csv = "source,level,t,m\n";
        for (const auto& contour : contours)
            for (const auto& [t, m] : contour.vertices)
                csv += contour.source + "," + fmt17(contour.level) + "," +
                       fmt17(t) + "," + fmt17(m) + "\n";

        TmDiagramSpec spec;
        spec.t_max = t_axis;
        spec.m_max = m_axis;
        spec.region = RealizableRegion::make(
            config.p_max.value_or(set.context().pivot_size));
        spec.title = "isoperformance contours - " + set_label(set.context());
        spec.contours = contours;

        outputs.emplace_back("isoperf_" + tag + ".csv", csv);
        outputs.emplace_back("isoperf_" + tag + ".svg",
                             render_tm_diagram(spec));
    }
    write_outputs(config, std::move(outputs), result);
    return result;
}

CommandResult cmd_cost_curve(const RunConfig& config) {
    config.validate();
    const auto cm = config.cost_model();
    CommandResult result;
    const auto sets = load_input(config, result);
    std::string csv = "language,pivot_size,pi,cost\n";
    std::vector<CostCurveSeries> series;
    for (const auto& set : sets) {
        const auto fit = fit_amue(set, config.fit_options());
        const auto region = RealizableRegion::make(
            config.p_max.value_or(set.context().pivot_size));
        const auto levels = config.levels.empty()
                                ? default_levels(fit.params.a_zs, set)
                                : config.levels;
        const auto curve = min_cost_curve(fit.params, cm, region, levels);
        for (std::size_t i = 1; i < curve.size(); ++i)
            if (curve[i].second < curve[i - 1].second ||
                curve[i].first <= curve[i - 1].first)
                throw DomainError(set_label(set.context()) +
                                  ": cost curve is not monotone");
        char pivot[32];
        std::snprintf(pivot, sizeof(pivot), "%.0f",
                      set.context().pivot_size);
        for (const auto& [pi, cost] : curve)
            csv += set.context().language + "," + pivot + "," + fmt17(pi) +
                   "," + fmt17(cost) + "\n";
        series.emplace_back(
            set_label(set.context()),
            std::vector<std::pair<double, double>>(curve.begin(),
                                                   curve.end()));
    }
    std::vector<std::pair<std::string, std::string>> outputs;
    outputs.emplace_back("cost_curve.csv", csv);
    outputs.emplace_back("cost_curve.svg", render_cost_curve(series));
    write_outputs(config, std::move(outputs), result);
    return result;
}

namespace {

struct SubcommandFlags {
    std::string config_path, input, schema, model, out_dir;
    double ct = 0.0, cm = 0.0, ratio = 0.0, pmax = 0.0, split = 0.0;
    std::uint64_t seed = 0;
    int restarts = 0;
    std::vector<double> levels;
    CLI::Option *o_config = nullptr, *o_input = nullptr, *o_schema = nullptr,
                *o_model = nullptr, *o_out = nullptr, *o_ct = nullptr,
                *o_cm = nullptr, *o_ratio = nullptr, *o_pmax = nullptr,
                *o_split = nullptr, *o_seed = nullptr, *o_restarts = nullptr,
                *o_levels = nullptr;
};

void add_shared_flags(CLI::App* sub, SubcommandFlags& f) {
    f.o_config = sub->add_option("--config", f.config_path,
                                 "JSON config file; flags override it");
    f.o_input =
        sub->add_option("--input", f.input, "observations file (CSV or TSV)");
    f.o_schema = sub->add_option(
        "--schema", f.schema,
        "column overrides as role=header pairs, e.g. f1=macro_f1,seed=run");
    f.o_ct = sub->add_option("--ct", f.ct, "cost per translated example");
    f.o_cm = sub->add_option("--cm", f.cm, "cost per manual example");
    f.o_ratio = sub->add_option("--cost-ratio", f.ratio,
                                "translated/manual cost ratio c_t/c_m");
    f.o_pmax = sub->add_option("--pmax", f.pmax,
                               "realizable-region bound on translated size");
    f.o_model = sub->add_option("--model", f.model, "amue, gpr, or both")
                    ->check(CLI::IsMember({"amue", "gpr", "both"}));
    f.o_seed = sub->add_option("--seed", f.seed, "random seed");
    f.o_out = sub->add_option("--out-dir", f.out_dir, "output directory");
    f.o_levels = sub->add_option("--levels", f.levels,
                                 "comma-separated performance levels")
                     ->delimiter(',');
    f.o_split = sub->add_option("--split", f.split,
                                "train fraction for evaluate, in (0, 1)");
    f.o_restarts =
        sub->add_option("--restarts", f.restarts, "extra fit restarts");
}

RunConfig resolve_config(const std::string& command,
                         const SubcommandFlags& f) {
    RunConfig config;
    config.command = command;
    if (*f.o_config) apply_config_file(config, f.config_path);
    if (*f.o_input) config.input_path = f.input;
    if (*f.o_schema) config.schema_spec = f.schema;
    if (*f.o_ct) config.c_t = f.ct;
    if (*f.o_cm) config.c_m = f.cm;
    if (*f.o_ratio) config.cost_ratio = f.ratio;
    if (*f.o_pmax) config.p_max = f.pmax;
    if (*f.o_model) config.model = f.model;
    if (*f.o_seed) config.seed = f.seed;
    if (*f.o_out) config.out_dir = f.out_dir;
    if (*f.o_levels) config.levels = f.levels;
    if (*f.o_split) config.split_fraction = f.split;
    if (*f.o_restarts) config.restarts = f.restarts;
    return config;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"cost-optimal data-collection planning for multilingual "
                 "fine-tuning"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"fit", "fit performance models and write a parameter report"},
        {"evaluate", "train/test split with per-setup error metrics"},
        {"expansion-path",
         "cost-optimal (T, M) mixes across performance levels"},
        {"isoperf", "isoperformance contours as CSV and SVG"},
        {"cost-curve", "minimum cost as a function of performance"},
    };
    std::map<std::string, SubcommandFlags> flags;
    for (const auto& [name, description] : commands)
        add_shared_flags(app.add_subcommand(name, description), flags[name]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const auto* sub = app.get_subcommands().front();
    try {
        const RunConfig config =
            resolve_config(sub->get_name(), flags[sub->get_name()]);
        CommandResult result;
        if (config.command == "fit")
            result = cmd_fit(config);
        else if (config.command == "evaluate")
            result = cmd_evaluate(config);
        else if (config.command == "expansion-path")
            result = cmd_expansion_path(config);
        else if (config.command == "isoperf")
            result = cmd_isoperf(config);
        else
            result = cmd_cost_curve(config);
        for (const auto& warning : result.warnings)
            std::cerr << "perfplan: warning: " << warning << "\n";
        for (const auto& path : result.files_written)
            std::cout << "wrote " << path << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "perfplan: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace perfplan
