#include "perfplan/observations.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace perfplan {

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) out.push_back(trimmed(field));
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e && std::isfinite(out);
}

bool parse_integer(const std::string& s, long long& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && p == e;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Context ordering for deterministic set output.
auto context_key(const ExperimentContext& c) {
    return std::tie(c.language, c.pivot_size, c.pivot_language, c.model_label,
                    c.task_label);
}

} // namespace

void ExperimentContext::validate() const {
    if (language.empty())
        throw DomainError("experiment context: language code is empty");
    if (language == pivot_language)
        throw DomainError("experiment context: language '" + language +
                          "' equals its pivot language");
    if (!(pivot_size >= 0.0) || !std::isfinite(pivot_size))
        throw DomainError("experiment context: pivot_size must be >= 0");
}

ExperimentContext ExperimentContext::make(std::string language,
                                          std::string pivot_language,
                                          double pivot_size,
                                          std::string model_label,
                                          std::string task_label) {
    ExperimentContext ctx{std::move(language), std::move(pivot_language),
                          pivot_size, std::move(model_label),
                          std::move(task_label)};
    ctx.validate();
    return ctx;
}

void Observation::validate() const {
    context.validate();
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("observation: translated size must be >= 0");
    if (!(m >= 0.0) || !std::isfinite(m))
        throw DomainError("observation: manual size must be >= 0");
    if (!(pi >= 0.0 && pi <= 100.0))
        throw DomainError("observation: performance must lie in [0, 100]");
    if (t > context.pivot_size)
        throw DomainError(
            "observation: translated size exceeds the pivot dataset");
    if (pi_std && !(*pi_std >= 0.0))
        throw DomainError("observation: performance spread must be >= 0");
}

void ObservationSet::validate() const {
    if (rows.empty()) throw DomainError("observation set is empty");
    for (const auto& row : rows) row.validate();
    const auto& ctx = rows.front().context;
    for (const auto& row : rows)
        if (!(row.context == ctx))
            throw DomainError(
                "observation set mixes different experiment contexts");
    std::vector<std::tuple<double, double, long long, bool>> keys;
    keys.reserve(rows.size());
    for (const auto& row : rows)
        keys.emplace_back(row.t, row.m, row.seed.value_or(0),
                          row.seed.has_value());
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
        throw DomainError(
            "observation set repeats a (translated, manual, seed) triple");
}

ObservationSet ObservationSet::make(std::vector<Observation> rows) {
    ObservationSet set{std::move(rows)};
    set.validate();
    return set;
}

ColumnSchema schema_with_overrides(ColumnSchema base, const std::string& spec) {
    std::unordered_map<std::string, std::string*> roles = {
        {"language", &base.language},
        {"pivot_language", &base.pivot_language},
        {"pivot_size", &base.pivot_size},
        {"translated_size", &base.translated_size},
        {"manual_size", &base.manual_size},
        {"seed", &base.seed},
        {"f1", &base.f1},
        {"f1_std", &base.f1_std},
        {"model", &base.model_label},
        {"task", &base.task_label},
    };
    for (const auto& item : split_line(spec, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw DomainError("schema override '" + item +
                              "' is not of the form role=column");
        const std::string role = trimmed(item.substr(0, eq));
        const std::string column = trimmed(item.substr(eq + 1));
        const auto it = roles.find(role);
        if (it == roles.end())
            throw DomainError("schema override names unknown role '" + role +
                              "'");
        if (column.empty())
            throw DomainError("schema override for '" + role +
                              "' maps to an empty column name");
        *it->second = column;
    }
    return base;
}

namespace {

// Raw row as read, before range validation and scaling.
struct RawRow {
    std::size_t line = 0;
    ExperimentContext context;
    double t = 0.0;
    double m = 0.0;
    std::optional<long long> seed;
    double pi = 0.0;
    std::optional<double> pi_std;
};

struct HeaderIndex {
    // -1 when the column is absent.
    int language = -1, pivot_language = -1, pivot_size = -1;
    int translated_size = -1, manual_size = -1, seed = -1;
    int f1 = -1, f1_std = -1, model_label = -1, task_label = -1;
};

int find_column(const std::vector<std::string>& header,
                const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

} // namespace

LoadResult load_observations(const std::string& path,
                             const ColumnSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observations file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw IoError("observations file '" + path +
                      "' is empty (a header row is required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto header = split_line(line, delim);

    HeaderIndex idx;
    idx.language = find_column(header, schema.language);
    idx.pivot_language = find_column(header, schema.pivot_language);
    idx.pivot_size = find_column(header, schema.pivot_size);
    idx.translated_size = find_column(header, schema.translated_size);
    idx.manual_size = find_column(header, schema.manual_size);
    idx.seed = find_column(header, schema.seed);
    idx.f1 = find_column(header, schema.f1);
    idx.f1_std = find_column(header, schema.f1_std);
    idx.model_label = find_column(header, schema.model_label);
    idx.task_label = find_column(header, schema.task_label);

    const std::vector<std::pair<int, const std::string*>> required = {
        {idx.language, &schema.language},
        {idx.pivot_language, &schema.pivot_language},
        {idx.pivot_size, &schema.pivot_size},
        {idx.translated_size, &schema.translated_size},
        {idx.manual_size, &schema.manual_size},
        {idx.f1, &schema.f1},
    };
    for (const auto& [col, name] : required)
        if (col < 0)
            throw IoError("observations file '" + path +
                          "' is missing required column '" + *name + "'");

    LoadResult result;
    std::vector<RawRow> parsed;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        ++result.rows_total;
        const auto fields = split_line(line, delim);

        auto reject = [&](const std::string& why) {
            result.rejects.push_back(
                {line_no, "line " + std::to_string(line_no) + ": " + why});
        };
        auto field_at = [&](int col) -> const std::string& {
            static const std::string empty;
            return col >= 0 && col < static_cast<int>(fields.size())
                       ? fields[static_cast<std::size_t>(col)]
                       : empty;
        };

        if (fields.size() != header.size()) {
            reject("expected " + std::to_string(header.size()) +
                   " fields, found " + std::to_string(fields.size()));
            continue;
        }

        RawRow row;
        row.line = line_no;
        row.context.language = field_at(idx.language);
        row.context.pivot_language = field_at(idx.pivot_language);
        row.context.model_label = field_at(idx.model_label);
        row.context.task_label = field_at(idx.task_label);

        bool ok = true;
        auto want_number = [&](int col, const std::string& name, double& out) {
            if (!ok) return; // one reject entry per row
            if (!parse_double(field_at(col), out)) {
                reject("non-numeric " + name + " '" + field_at(col) + "'");
                ok = false;
            }
        };
        want_number(idx.pivot_size, "pivot_size", row.context.pivot_size);
        want_number(idx.translated_size, "translated_size", row.t);
        want_number(idx.manual_size, "manual_size", row.m);
        want_number(idx.f1, "performance", row.pi);
        if (ok && idx.seed >= 0 && !field_at(idx.seed).empty()) {
            long long s = 0;
            if (!parse_integer(field_at(idx.seed), s)) {
                reject("non-integer seed '" + field_at(idx.seed) + "'");
                ok = false;
            } else {
                row.seed = s;
            }
        }
        if (ok && idx.f1_std >= 0 && !field_at(idx.f1_std).empty()) {
            double s = 0.0;
            if (!parse_double(field_at(idx.f1_std), s)) {
                reject("non-numeric performance spread '" +
                       field_at(idx.f1_std) + "'");
                ok = false;
            } else {
                row.pi_std = s;
            }
        }
        if (ok) parsed.push_back(std::move(row));
    }

    // Inputs reported on a 0-1 scale are rescaled to 0-100.
    if (!parsed.empty()) {
        const bool all_unit = std::all_of(
            parsed.begin(), parsed.end(),
            [](const RawRow& r) { return r.pi >= 0.0 && r.pi <= 1.0; });
        if (all_unit) {
            for (auto& r : parsed) {
                r.pi *= 100.0;
                if (r.pi_std) *r.pi_std *= 100.0;
            }
            result.warnings.push_back(
                "all performance values lie in [0, 1]; rescaled by 100");
        }
    }

    std::map<std::tuple<std::string, double, std::string, std::string,
                        std::string>,
             std::vector<Observation>>
        groups;
    std::map<std::tuple<std::string, double, std::string, std::string,
                        std::string>,
             std::vector<std::tuple<double, double, long long, bool>>>
        seen;
    for (const auto& r : parsed) {
        auto reject = [&](const std::string& why) {
            result.rejects.push_back(
                {r.line, "line " + std::to_string(r.line) + ": " + why});
        };
        Observation obs{r.context, r.t, r.m, r.seed, r.pi, r.pi_std};
        try {
            obs.validate();
        } catch (const DomainError& err) {
            reject(err.what());
            continue;
        }
        const auto key = context_key(obs.context);
        auto triple = std::make_tuple(obs.t, obs.m, obs.seed.value_or(0),
                                      obs.seed.has_value());
        auto& triples = seen[key];
        if (std::find(triples.begin(), triples.end(), triple) !=
            triples.end()) {
            reject("duplicate (translated, manual, seed) configuration");
            continue;
        }
        triples.push_back(triple);
        groups[key].push_back(std::move(obs));
    }

    for (auto& [key, rows] : groups)
        result.sets.push_back(ObservationSet::make(std::move(rows)));
    std::stable_sort(
        result.rejects.begin(), result.rejects.end(),
        [](const RowError& a, const RowError& b) { return a.line < b.line; });
    return result;
}

void write_observations(const std::string& path,
                        const std::vector<ObservationSet>& sets,
                        const ColumnSchema& schema) {
    bool any_seed = false, any_std = false, any_model = false,
         any_task = false;
    for (const auto& set : sets)
        for (const auto& row : set.rows) {
            any_seed |= row.seed.has_value();
            any_std |= row.pi_std.has_value();
            any_model |= !row.context.model_label.empty();
            any_task |= !row.context.task_label.empty();
        }

    std::ofstream out(path);
    if (!out) throw IoError("cannot write observations file '" + path + "'");

    out << schema.language << ',' << schema.pivot_language << ','
        << schema.pivot_size << ',' << schema.translated_size << ','
        << schema.manual_size << ',' << schema.f1;
    if (any_seed) out << ',' << schema.seed;
    if (any_std) out << ',' << schema.f1_std;
    if (any_model) out << ',' << schema.model_label;
    if (any_task) out << ',' << schema.task_label;
    out << '\n';

    for (const auto& set : sets)
        for (const auto& row : set.rows) {
            out << row.context.language << ',' << row.context.pivot_language
                << ',' << format_double(row.context.pivot_size) << ','
                << format_double(row.t) << ',' << format_double(row.m) << ','
                << format_double(row.pi);
            if (any_seed)
                out << ','
                    << (row.seed ? std::to_string(*row.seed) : std::string());
            if (any_std)
                out << ','
                    << (row.pi_std ? format_double(*row.pi_std)
                                   : std::string());
            if (any_model) out << ',' << row.context.model_label;
            if (any_task) out << ',' << row.context.task_label;
            out << '\n';
        }
    if (!out) throw IoError("failed while writing '" + path + "'");
}

ObservationSet aggregate_seeds(const ObservationSet& obs) {
    std::map<std::pair<double, double>, std::vector<const Observation*>>
        groups;
    for (const auto& row : obs.rows) groups[{row.t, row.m}].push_back(&row);

    std::vector<Observation> out;
    out.reserve(groups.size());
    for (const auto& [key, members] : groups) {
        if (members.size() == 1) {
            Observation row = *members.front();
            row.seed.reset();
            out.push_back(std::move(row));
            continue;
        }
        double mean = 0.0;
        for (const auto* row : members) mean += row->pi;
        mean /= static_cast<double>(members.size());
        double ss = 0.0;
        for (const auto* row : members) {
            const double d = row->pi - mean;
            ss += d * d;
        }
        Observation row = *members.front();
        row.seed.reset();
        row.pi = mean;
        row.pi_std =
            std::sqrt(ss / static_cast<double>(members.size() - 1));
        out.push_back(std::move(row));
    }
    return ObservationSet::make(std::move(out));
}

} // namespace perfplan
