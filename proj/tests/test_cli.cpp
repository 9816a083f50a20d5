#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "perfplan/cli.hpp"
#include "perfplan/errors.hpp"

using namespace perfplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Self-cleaning output directory for one command run.
struct OutDir {
    fs::path path;
    explicit OutDir(const std::string& name)
        : path(fs::path("cli_test_out") / name) {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    ~OutDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
        fs::remove(path.parent_path(), ec); // only when now empty
    }
    std::string str() const { return path.string(); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file ", path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

double surface(double a_zs, double a_t, double alpha_t, double a_m,
               double alpha_m, double t, double m) {
    const double tt = t == 0.0 ? 0.0 : a_t * std::pow(t, alpha_t);
    const double mm = m == 0.0 ? 0.0 : a_m * std::pow(m, alpha_m);
    return a_zs + tt + mm;
}

// Two experiment sets. "aa" responds to both inputs and carries two seeds
// per point whose +/-0.1 deviations cancel under aggregation; "bb"
// responds to manual examples only, so its fitted translated term
// collapses to the degenerate range.
struct SampleData {
    std::string path = "cli_test_observations.csv";
    SampleData() {
        std::ofstream out(path);
        out << "language,pivot_language,pivot_size,translated_size,"
               "manual_size,seed,f1,model,task\n";
        char line[256];
        for (const double t : {0.0, 200.0, 600.0, 1500.0, 3000.0})
            for (const double m : {0.0, 100.0, 400.0, 1200.0, 2500.0})
                for (const int seed : {1, 2}) {
                    const double pi =
                        surface(40.0, 0.5, 0.4, 2.0, 0.3, t, m) +
                        (seed == 1 ? 0.1 : -0.1);
                    std::snprintf(line, sizeof(line),
                                  "aa,en,3000,%g,%g,%d,%.10f,mdl,tsk\n", t, m,
                                  seed, pi);
                    out << line;
                }
        for (const double t : {0.0, 300.0, 900.0, 1500.0})
            for (const double m : {0.0, 150.0, 600.0, 1800.0}) {
                const double pi = surface(49.0, 0.0, 0.5, 1.8, 0.32, t, m);
                std::snprintf(line, sizeof(line),
                              "bb,en,1500,%g,%g,1,%.10f,mdl,tsk\n", t, m, pi);
                out << line;
            }
    }
    ~SampleData() { std::remove(path.c_str()); }
};

const std::string& sample_path() {
    static SampleData data;
    return data.path;
}

RunConfig base_config(const std::string& out_dir) {
    RunConfig config;
    config.input_path = sample_path();
    config.seed = 3;
    config.out_dir = out_dir;
    return config;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        REQUIRE_MESSAGE(false, "no column ", name);
        return 0;
    }
    double num(std::size_t row, const std::string& name) const {
        return std::stod(rows[row][column(name)]);
    }
};

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::istringstream fields_in(line);
        std::string field;
        while (std::getline(fields_in, field, ',')) fields.push_back(field);
        if (first)
            table.header = fields;
        else
            table.rows.push_back(fields);
        first = false;
    }
    return table;
}

bool has_warning(const CommandResult& result, const std::string& needle) {
    for (const auto& warning : result.warnings)
        if (warning.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST_CASE("run configuration validation") {
    RunConfig config = base_config(".");

    SUBCASE("the defaults with an input are valid") {
        config.validate();
    }
    SUBCASE("an input file is required") {
        config.input_path.clear();
        CHECK_THROWS_AS(config.validate(), DomainError);
    }
    SUBCASE("model names are restricted") {
        config.model = "quadratic";
        CHECK_THROWS_AS(config.validate(), DomainError);
    }
    SUBCASE("the split fraction must be interior") {
        config.split_fraction = 1.0;
        CHECK_THROWS_AS(config.validate(), DomainError);
        config.split_fraction = 0.0;
        CHECK_THROWS_AS(config.validate(), DomainError);
    }
    SUBCASE("levels must be strictly increasing") {
        config.levels = {50.0, 50.0};
        CHECK_THROWS_AS(config.validate(), DomainError);
    }
    SUBCASE("unit costs must be positive") {
        config.c_t = 0.0;
        CHECK_THROWS_AS(config.validate(), DomainError);
    }
    SUBCASE("the cost model needs exactly one of cm and cost-ratio") {
        CHECK_THROWS_AS(config.cost_model(), DomainError);
        config.c_m = 0.07;
        config.cost_ratio = 0.1;
        CHECK_THROWS_AS(config.cost_model(), DomainError);
    }
    SUBCASE("a cost ratio fixes the manual unit cost") {
        config.c_t = 0.007;
        config.cost_ratio = 0.1;
        const auto cm = config.cost_model();
        CHECK(cm.c_t == doctest::Approx(0.007));
        CHECK(cm.cost_ratio() == doctest::Approx(0.1));
    }
}

TEST_CASE("config files merge under explicit flags") {
    const std::string path = "cli_test_config.json";
    const auto write_config = [&](const std::string& text) {
        std::ofstream out(path);
        out << text;
    };

    SUBCASE("recognized keys land in the run configuration") {
        write_config(R"({"model": "gpr", "seed": 9, "ct": 0.5,
                         "cost_ratio": 0.2, "levels": [50, 60],
                         "split": 0.7, "restarts": 4,
                         "input": "obs.csv", "out_dir": "out"})");
        RunConfig config;
        apply_config_file(config, path);
        CHECK(config.model == "gpr");
        CHECK(config.seed == 9);
        CHECK(config.c_t == doctest::Approx(0.5));
        REQUIRE(config.cost_ratio.has_value());
        CHECK(*config.cost_ratio == doctest::Approx(0.2));
        CHECK(config.levels == std::vector<double>{50.0, 60.0});
        CHECK(config.split_fraction == doctest::Approx(0.7));
        CHECK(config.restarts == 4);
        CHECK(config.input_path == "obs.csv");
        CHECK(config.out_dir == "out");
    }
    SUBCASE("unknown keys are rejected") {
        write_config(R"({"inpt": "x.csv"})");
        RunConfig config;
        CHECK_THROWS_AS(apply_config_file(config, path), DomainError);
    }
    SUBCASE("type mismatches are rejected") {
        write_config(R"({"seed": "many"})");
        RunConfig config;
        CHECK_THROWS_AS(apply_config_file(config, path), DomainError);
    }
    SUBCASE("the root must be an object") {
        write_config("[1, 2]");
        RunConfig config;
        CHECK_THROWS_AS(apply_config_file(config, path), DomainError);
    }
    SUBCASE("a missing file is an input error") {
        RunConfig config;
        CHECK_THROWS_AS(apply_config_file(config, "cli_test_absent.json"),
                        IoError);
    }
    std::remove(path.c_str());
}

TEST_CASE("fit command") {
    OutDir dir("fit");
    RunConfig config = base_config(dir.str());
    config.model = "both";
    const auto result = cmd_fit(config);

    REQUIRE(result.files_written.size() == 1);
    const auto doc = json::parse(read_file(result.files_written.front()));
    CHECK(doc["command"] == "fit");
    CHECK(doc["model"] == "both");
    REQUIRE(doc["rows"].size() == 2);

    const auto& aa = doc["rows"][0];
    CHECK(aa["language"] == "aa");
    CHECK(aa["pivot_size"].get<double>() == doctest::Approx(3000.0));
    CHECK(aa["n_observations"].get<int>() == 25); // seeds averaged

    SUBCASE("the closed-form block recovers the generating surface") {
        REQUIRE(aa.contains("amue"));
        CHECK(aa["amue"]["a_zs"].get<double>() == doctest::Approx(40.0).epsilon(0.01));
        CHECK(aa["amue"]["alpha_m"].get<double>() == doctest::Approx(0.3).epsilon(0.05));
        CHECK(aa["amue"]["fit"]["rmse"].get<double>() < 0.05);
        REQUIRE(aa["amue"]["fit"]["by_setup"].size() == 4);
        CHECK(aa["amue"]["fit"]["by_setup"][0]["setup"] == "zero-shot");
    }
    SUBCASE("the surrogate block reports its hyperparameters") {
        REQUIRE(aa.contains("gpr"));
        CHECK(aa["gpr"]["length_scale"].size() == 1);
        CHECK(aa["gpr"]["length_scale"][0].get<double>() > 0.0);
        CHECK(aa["gpr"]["noise_variance"].get<double>() > 0.0);
        CHECK(aa["gpr"].contains("log_marginal"));
    }
    SUBCASE("reruns are byte-identical") {
        OutDir dir_b("fit_b");
        RunConfig config_b = config;
        config_b.out_dir = dir_b.str();
        const auto result_b = cmd_fit(config_b);
        CHECK(read_file(result.files_written.front()) ==
              read_file(result_b.files_written.front()));
    }
}

TEST_CASE("evaluate command") {
    OutDir dir("evaluate");
    RunConfig config = base_config(dir.str());
    config.model = "amue";
    config.split_fraction = 0.8;
    const auto result = cmd_evaluate(config);

    REQUIRE(result.files_written.size() == 1);
    const auto doc = json::parse(read_file(result.files_written.front()));
    CHECK(doc["command"] == "evaluate");
    REQUIRE(doc["rows"].size() == 2);
    for (const auto& row : doc["rows"]) {
        const int n_train = row["n_train"].get<int>();
        const int n_test = row["n_test"].get<int>();
        CHECK(n_train > n_test);
        CHECK(n_test > 0);
        REQUIRE(row.contains("amue"));
        CHECK_FALSE(row.contains("gpr"));
        CHECK(row["amue"]["train"]["split"] == "train");
        CHECK(row["amue"]["test"]["split"] == "test");
        CHECK(row["amue"]["train"]["count"].get<int>() == n_train);
        CHECK(row["amue"]["test"]["count"].get<int>() == n_test);
        // noise-free after aggregation, so held-out error stays small
        CHECK(row["amue"]["test"]["rmse"].get<double>() < 0.5);
    }
}

TEST_CASE("expansion-path command") {
    OutDir dir("path");
    RunConfig config = base_config(dir.str());
    config.c_t = 0.007;
    config.cost_ratio = 0.1;
    const auto result = cmd_expansion_path(config);

    REQUIRE(result.files_written.size() == 4);
    const fs::path out(dir.str());

    SUBCASE("per-set outputs are named by language and pivot") {
        CHECK(fs::exists(out / "path_aa_P3000.csv"));
        CHECK(fs::exists(out / "path_aa_P3000.svg"));
        CHECK(fs::exists(out / "path_bb_P1500.csv"));
        CHECK(fs::exists(out / "path_bb_P1500.svg"));
    }
    SUBCASE("the path CSV is monotone in level and cost") {
        const auto table = parse_csv(read_file(out / "path_aa_P3000.csv"));
        REQUIRE(table.header ==
                std::vector<std::string>{"level", "t", "m", "pi", "cost",
                                         "on_boundary"});
        REQUIRE(table.rows.size() == 12); // default level ladder
        for (std::size_t i = 1; i < table.rows.size(); ++i) {
            CHECK(table.num(i, "level") > table.num(i - 1, "level"));
            CHECK(table.num(i, "cost") >= table.num(i - 1, "cost"));
        }
        for (std::size_t i = 0; i < table.rows.size(); ++i)
            CHECK(table.num(i, "pi") ==
                  doctest::Approx(table.num(i, "level")).epsilon(1e-6));
    }
    SUBCASE("a manual-only surface is flagged and runs along t = 0") {
        CHECK(has_warning(result, "degenerate"));
        const auto table = parse_csv(read_file(out / "path_bb_P1500.csv"));
        REQUIRE(!table.rows.empty());
        for (std::size_t i = 0; i < table.rows.size(); ++i)
            CHECK(table.num(i, "t") == 0.0);
    }
    SUBCASE("the diagram carries contours, markers, and isocosts") {
        const auto svg = read_file(out / "path_aa_P3000.svg");
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("class=\"contour\"") != std::string::npos);
        CHECK(svg.find("class=\"expansion-path\"") != std::string::npos);
        CHECK(svg.find("class=\"path-marker\"") != std::string::npos);
        CHECK(svg.find("class=\"isocost\"") != std::string::npos);
        CHECK(svg.find("class=\"realizable-region\"") != std::string::npos);
    }
}

TEST_CASE("isoperf command") {
    OutDir dir("isoperf");
    RunConfig config = base_config(dir.str());
    config.model = "both";
    config.levels = {45.0, 52.0};
    const auto result = cmd_isoperf(config);

    const fs::path out(dir.str());
    REQUIRE(fs::exists(out / "isoperf_aa_P3000.csv"));
    REQUIRE(fs::exists(out / "isoperf_aa_P3000.svg"));

    SUBCASE("both model sources appear in the vertex table") {
        const auto table = parse_csv(read_file(out / "isoperf_aa_P3000.csv"));
        REQUIRE(table.header ==
                std::vector<std::string>{"source", "level", "t", "m"});
        bool saw_amue = false, saw_gpr = false;
        const auto source = table.column("source");
        for (const auto& row : table.rows) {
            if (row[source] == "amue") saw_amue = true;
            if (row[source] == "gpr") saw_gpr = true;
        }
        CHECK(saw_amue);
        CHECK(saw_gpr);
    }
    SUBCASE("a level below a set's floor becomes a warning, not a failure") {
        // bb's zero-shot floor is 49, so level 45 has no contour there.
        CHECK(has_warning(result, "bb (P=1500)"));
        CHECK(fs::exists(out / "isoperf_bb_P1500.csv"));
    }
    SUBCASE("the diagram tags each contour with its source") {
        const auto svg = read_file(out / "isoperf_aa_P3000.svg");
        CHECK(svg.find("data-source=\"amue\"") != std::string::npos);
        CHECK(svg.find("data-source=\"gpr\"") != std::string::npos);
    }
}

TEST_CASE("cost-curve command") {
    OutDir dir("curve");
    RunConfig config = base_config(dir.str());
    config.c_t = 0.007;
    config.c_m = 0.07;
    const auto result = cmd_cost_curve(config);

    REQUIRE(result.files_written.size() == 2);
    const fs::path out(dir.str());
    const auto table = parse_csv(read_file(out / "cost_curve.csv"));
    REQUIRE(table.header == std::vector<std::string>{"language", "pivot_size",
                                                     "pi", "cost"});
    const auto lang = table.column("language");
    for (const std::string name : {"aa", "bb"}) {
        double last_pi = -1.0, last_cost = -1.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (table.rows[i][lang] != name) continue;
            CHECK(table.num(i, "pi") > last_pi);
            CHECK(table.num(i, "cost") >= last_cost);
            last_pi = table.num(i, "pi");
            last_cost = table.num(i, "cost");
            ++count;
        }
        CHECK(count == 12);
    }
    const auto svg = read_file(out / "cost_curve.svg");
    CHECK(svg.find("data-label=\"aa (P=3000)\"") != std::string::npos);
    CHECK(svg.find("data-label=\"bb (P=1500)\"") != std::string::npos);
}

TEST_CASE("a failing command writes nothing") {
    OutDir dir("atomic");
    RunConfig config = base_config(dir.str());
    config.c_t = 0.007;
    config.cost_ratio = 0.1;
    config.levels = {30.0}; // below both zero-shot floors
    CHECK_THROWS_AS(cmd_expansion_path(config), DomainError);
    CHECK_FALSE(fs::exists(fs::path(dir.str())));
}

TEST_CASE("command line entry point") {
    const auto run = [](std::vector<const char*> argv) {
        argv.insert(argv.begin(), "perfplan");
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };

    SUBCASE("a fit run writes its report and exits cleanly") {
        OutDir dir("cli_fit");
        CHECK(run({"fit", "--input", sample_path().c_str(), "--model", "both",
                   "--seed", "3", "--out-dir", dir.str().c_str()}) == 0);
        const auto doc =
            json::parse(read_file(fs::path(dir.str()) / "fit_report.json"));
        CHECK(doc["model"] == "both");
        CHECK(doc["rows"][0].contains("gpr"));
    }
    SUBCASE("flags override the config file") {
        OutDir dir("cli_cfg");
        const std::string cfg = "cli_test_entry.json";
        {
            std::ofstream out(cfg);
            out << R"({"model": "amue", "input": ")" << sample_path()
                << R"(", "out_dir": ")" << dir.str() << R"("})";
        }
        CHECK(run({"fit", "--config", cfg.c_str(), "--model", "gpr"}) == 0);
        const auto doc =
            json::parse(read_file(fs::path(dir.str()) / "fit_report.json"));
        CHECK(doc["model"] == "gpr");
        CHECK_FALSE(doc["rows"][0].contains("amue"));
        std::remove(cfg.c_str());
    }
    SUBCASE("missing inputs fail with a nonzero exit") {
        CHECK(run({"fit"}) == 1);
    }
    SUBCASE("a missing subcommand is a usage error") {
        CHECK(run({}) != 0);
    }
    SUBCASE("unknown flags are usage errors") {
        CHECK(run({"fit", "--frobnicate"}) != 0);
    }
    SUBCASE("a cost command without a cost model fails") {
        OutDir dir("cli_nocost");
        CHECK(run({"cost-curve", "--input", sample_path().c_str(),
                   "--out-dir", dir.str().c_str()}) == 1);
        CHECK_FALSE(fs::exists(fs::path(dir.str()) / "cost_curve.csv"));
    }
}
