#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "rmprod/cli/command_line.hpp"
#include "rmprod/cli/output.hpp"
#include "rmprod/cli/record.hpp"

using namespace rmprod;
using namespace rmprod::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rmprod_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::string> csv_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

Json payload(ResultRecord rec) {
    Json j = record_to_json(rec);
    j.erase("timestamp");
    j.erase("elapsed_seconds");
    return j;
}

} // namespace

TEST_CASE("parse_n_list") {
    CHECK(parse_n_list("10") == std::vector<int>{10});
    CHECK(parse_n_list("1,2,4") == std::vector<int>{1, 2, 4});
    CHECK(parse_n_list("1..5") == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(parse_n_list("1..3, 8,16") == std::vector<int>{1, 2, 3, 8, 16});
    CHECK_THROWS_AS(parse_n_list("5..1"), ConfigError);
    CHECK_THROWS_AS(parse_n_list("1,,2"), ConfigError);
    CHECK_THROWS_AS(parse_n_list("x"), ConfigError);
}

TEST_CASE("parse_args") {
    SUBCASE("minimal estimate flags") {
        const auto cfg = parse_args({"estimate", "--k", "2", "--n", "10", "--measure", "gaussian", "--trials", "100000",
                                     "--seed", "42"});
        CHECK(cfg.command == Command::Estimate);
        CHECK(cfg.k == 2);
        CHECK(cfg.n == std::vector<int>{10});
        CHECK(cfg.measure.type == "gaussian");
        CHECK(cfg.trials == 100000);
        CHECK(cfg.seed == 42u);
        CHECK(cfg.policy == "fallback");
    }
    SUBCASE("named errors") {
        CHECK_THROWS_AS(parse_args({"estimate", "--measure", "atomic", "--atoms", "0:1/2,1:1/4"}), MassSumError);
        CHECK_THROWS_AS(parse_args({"estimate", "--measure", "cauchy"}), UnknownMeasureError);
        CHECK_THROWS_AS(parse_args({"estimate", "--k", "9"}), DimensionRangeError);
        CHECK_THROWS_AS(parse_args({"estimate", "--k", "0"}), DimensionRangeError);
        CHECK_THROWS_AS(parse_args({"estimate", "--measure", "finite", "--support", "1,0,0,1@1/2"}), MassSumError);
        CHECK_THROWS_AS(parse_args({"estimate", "--n", "1,2"}), ConfigError);
        CHECK_THROWS_AS(parse_args({"estimate", "--bogus", "1"}), ConfigError);
        CHECK_THROWS_AS(parse_args({"lemma-check", "--k", "3"}), DimensionRangeError);
        CHECK_THROWS_AS(parse_args({"oracle", "--measure", "gaussian"}), ConfigError);
        CHECK_THROWS_AS(parse_args({"estimate", "--out", "result.txt"}), ConfigError);
    }
    SUBCASE("atomic with a continuous part") {
        const auto cfg = parse_args({"estimate", "--measure", "atomic", "--atoms", "0:1/4,1:1/4", "--continuous",
                                     "uniform", "--lo", "-2", "--hi", "2", "--continuous-weight", "1/2"});
        CHECK(cfg.measure.entry.atoms.size() == 2);
        CHECK(cfg.measure.entry.continuous == "uniform");
        CHECK(cfg.measure.entry.lo == -2.0);
        CHECK(cfg.measure.entry.continuous_weight == mpq_class(1, 2));
    }
    SUBCASE("file values, flags win") {
        const fs::path dir = scratch_dir("precedence");
        const fs::path file = dir / "cfg.json";
        std::ofstream(file) << R"({"k": 3, "trials": 500, "seed": 7,
                                   "measure": {"type": "gaussian", "mean": 0.5, "stddev": 2}})";
        const auto from_file = parse_args({"estimate", "--config", file.string()});
        CHECK(from_file.k == 3);
        CHECK(from_file.trials == 500);
        CHECK(from_file.measure.entry.mean == 0.5);
        const auto cfg = parse_args({"estimate", "--config", file.string(), "--trials", "900", "--stddev", "3"});
        CHECK(cfg.trials == 900);
        CHECK(cfg.k == 3);
        CHECK(cfg.measure.entry.mean == 0.5);
        CHECK(cfg.measure.entry.stddev == 3.0);
        // a different measure type starts from that type's defaults
        const auto swapped = parse_args({"estimate", "--config", file.string(), "--measure", "uniform"});
        CHECK(swapped.measure.type == "uniform");
        CHECK(swapped.measure.entry.mean == 0.0);
    }
    SUBCASE("config file errors") {
        const fs::path dir = scratch_dir("bad");
        std::ofstream(dir / "typo.json") << R"({"trails": 5})";
        CHECK_THROWS_AS(parse_args({"estimate", "--config", (dir / "typo.json").string()}), ConfigError);
        std::ofstream(dir / "broken.json") << "{";
        CHECK_THROWS_AS(parse_args({"estimate", "--config", (dir / "broken.json").string()}), ConfigError);
        CHECK_THROWS_AS(parse_args({"estimate", "--config", (dir / "missing.json").string()}), ConfigError);
    }
}

TEST_CASE("config round trip") {
    std::vector<ExperimentConfig> configs;
    {
        ExperimentConfig c;
        c.seed = 123;
        c.tau = 3.7e-11;
        c.confidence = 0.999;
        configs.push_back(c);
    }
    configs.push_back(parse_args({"sweep", "--k", "3", "--n", "1..4,8", "--measure", "uniform", "--lo", "-0.3",
                                  "--hi", "0.7", "--policy", "float", "--out", "a.json", "--out", "b.csv"}));
    configs.push_back(parse_args({"oracle", "--measure", "rademacher", "--n", "1..3", "--route", "tuples"}));
    configs.push_back(parse_args({"estimate", "--measure", "atomic", "--atoms", "0.1:1/3,-2:1/6", "--continuous",
                                  "gaussian", "--mean", "0.25", "--stddev", "1.5", "--continuous-weight", "1/2"}));
    configs.push_back(parse_args({"bound-check", "--k", "3", "--measure", "rank-one", "--p1", "1/7", "--generic",
                                  "atomic", "--atoms", "2:1"}));
    configs.push_back(parse_args({"oracle", "--k", "2", "--measure", "finite", "--support",
                                  "1,0,0,1@1/3;0,-1,1,0@2/3", "--workers", "3", "--budget", "5000"}));
    for (const auto& cfg : configs) {
        CHECK(config_from_json(to_json(cfg)) == cfg);
        CHECK(config_from_json(Json::parse(to_json(cfg).dump())) == cfg);
    }
}

TEST_CASE("execute") {
    SUBCASE("oracle: exact 3/4 for Rademacher k=2, n=1") {
        const auto rec = execute(parse_args({"oracle", "--k", "2", "--n", "1", "--measure", "rademacher"}));
        REQUIRE(rec.rows.size() == 1);
        CHECK(*rec.rows[0].exact == mpq_class(3, 4));
        const Json j = record_to_json(rec);
        CHECK(j["rows"][0]["exact"] == "3/4");
        CHECK(j["rows"][0]["exact_num"] == "3");
        CHECK(j["rows"][0]["exact_den"] == "4");
        CHECK(j["seed"].is_number_unsigned());
    }
    SUBCASE("oracle routes agree; tuples past the budget is a budget error") {
        const auto agg = execute(parse_args({"oracle", "--measure", "rademacher", "--n", "1..3"}));
        const auto tup = execute(parse_args({"oracle", "--measure", "rademacher", "--n", "1..3", "--route", "tuples"}));
        for (std::size_t i = 0; i < 3; ++i) CHECK(*agg.rows[i].exact == *tup.rows[i].exact);
        CHECK_THROWS_AS(execute(parse_args({"oracle", "--measure", "rademacher", "--n", "3", "--route", "tuples",
                                            "--budget", "100"})),
                        BudgetExceeded);
    }
    SUBCASE("bound-check Rademacher n = 1..8 holds exactly") {
        const auto rec = execute(parse_args({"bound-check", "--k", "2", "--measure", "rademacher", "--n", "1..8"}));
        CHECK(rec.passed == true);
        CHECK(rec.exit_code() == kExitOk);
        REQUIRE(rec.p1);
        CHECK(*rec.p1->exact == mpq_class(1, 2));
        for (const auto& r : rec.rows) CHECK(*r.exact >= 1 - mpq_class(1, 1u << r.n));
    }
    SUBCASE("a failed check maps to exit code 2") {
        ResultRecord rec;
        rec.passed = false;
        CHECK(rec.exit_code() == kExitBoundViolated);
        rec.passed.reset();
        CHECK(rec.exit_code() == kExitOk);
    }
    SUBCASE("identical invocations give identical payloads") {
        const std::vector<std::string> args{"sweep", "--k", "3", "--n", "1,3", "--measure", "gaussian",
                                            "--trials", "3000", "--seed", "11"};
        CHECK(payload(execute(parse_args(args))) == payload(execute(parse_args(args))));
        auto with_workers = args;
        with_workers.insert(with_workers.end(), {"--workers", "3"});
        const Json a = payload(execute(parse_args(args)))["rows"];
        const Json b = payload(execute(parse_args(with_workers)))["rows"];
        CHECK(a == b);
    }
    SUBCASE("missing seed is generated and recorded") {
        const auto rec = execute(parse_args({"estimate", "--trials", "10"}));
        REQUIRE(rec.config.seed);
        auto replay = rec.config;
        const auto again = execute(replay);
        CHECK(again.rows[0].estimate->all_real == rec.rows[0].estimate->all_real);
    }
    SUBCASE("lemma-check") {
        const auto rec = execute(parse_args({"lemma-check", "--measure", "rademacher", "--n", "1,2", "--trials",
                                             "5000", "--seed", "3"}));
        CHECK(rec.passed == true);
        CHECK(*rec.rows[0].exact == mpq_class(3, 4));
        CHECK(rec.rows[0].lemma->exact->p_either_nonneg == 1);
    }
}

TEST_CASE("outputs") {
    SUBCASE("single-n sweep: header plus one row") {
        const auto rec = execute(parse_args({"sweep", "--n", "4", "--trials", "1000", "--seed", "1"}));
        const auto lines = csv_lines(record_to_csv(rec));
        REQUIRE(lines.size() == 2);
        CHECK(lines[0] == kCsvHeader);
        CHECK(split_csv_line(lines[1]).size() == 11);
    }
    SUBCASE("csv and json agree cell by cell") {
        const auto rec = execute(parse_args({"bound-check", "--measure", "rademacher", "--n", "1..4"}));
        const Json j = record_to_json(rec);
        const auto lines = csv_lines(record_to_csv(rec));
        const auto header = split_csv_line(lines[0]);
        REQUIRE(lines.size() == rec.rows.size() + 1);
        for (std::size_t i = 0; i < rec.rows.size(); ++i) {
            const auto cells = split_csv_line(lines[i + 1]);
            REQUIRE(cells.size() == header.size());
            for (std::size_t c = 0; c < header.size(); ++c) {
                const Json& v = j["rows"][i][header[c]];
                const std::string expected = v.is_null() ? "" : v.is_string() ? v.get<std::string>() : v.dump();
                CHECK(cells[c] == expected);
            }
        }
    }
    SUBCASE("bound column is 1 - (1 - p1)^n from the recorded p1") {
        const auto rec = execute(parse_args({"bound-check", "--k", "2", "--measure", "atomic", "--atoms",
                                             "0:1/3,1:1/3,-1:1/3", "--n", "1..5"}));
        const Json j = record_to_json(rec);
        const double p1 = j["rank_one_mass"]["value"].get<double>();
        const auto lines = csv_lines(record_to_csv(rec));
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto cells = split_csv_line(lines[i]);
            const int n = std::stoi(cells[0]);
            const double bound = std::stod(cells[8]);
            CHECK(bound == doctest::Approx(1.0 - std::pow(1.0 - p1, n)).epsilon(1e-14));
        }
        CHECK(rec.passed == true);
    }
    SUBCASE("svg: one polyline per series") {
        const auto sweep_rec = execute(parse_args({"sweep", "--n", "1,2,4", "--trials", "500", "--seed", "2"}));
        const std::string svg = record_to_svg(sweep_rec);
        CHECK(svg.rfind("<?xml", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("<polyline id=\"p_hat\"") != std::string::npos);
        CHECK(svg.find("id=\"half\"") != std::string::npos);
        CHECK(svg.find("id=\"whiskers\"") != std::string::npos);

        const auto bc = execute(parse_args({"bound-check", "--measure", "rademacher", "--n", "1..3"}));
        const std::string svg2 = record_to_svg(bc);
        std::size_t count = 0;
        for (std::size_t pos = svg2.find("<polyline"); pos != std::string::npos; pos = svg2.find("<polyline", pos + 1))
            ++count;
        CHECK(count == 2); // exact values and the bound curve
    }
    SUBCASE("format detection") {
        CHECK(output_format("a/b.json", "") == "json");
        CHECK(output_format("x.CSV", "") == "csv");
        CHECK(output_format("plot.svg", "") == "svg");
        CHECK(output_format("noext", "csv") == "csv");
        CHECK_THROWS_AS(output_format("x.txt", ""), ConfigError);
    }
    SUBCASE("output directory variable and atomic writes") {
        const fs::path dir = scratch_dir("outdir");
        ::setenv(kOutputDirEnv, dir.c_str(), 1);
        CHECK(resolve_output_path("r.json") == dir / "r.json");
        CHECK(resolve_output_path("/abs/r.json") == fs::path("/abs/r.json"));
        auto cfg = parse_args({"oracle", "--measure", "rademacher", "--n", "1", "--out", "sub/r.json", "--out",
                               "r.csv", "--out", "r.svg"});
        const auto written = emit_outputs(execute(cfg));
        ::unsetenv(kOutputDirEnv);
        CHECK(written.size() == 3);
        CHECK(fs::exists(dir / "sub" / "r.json"));
        CHECK(fs::exists(dir / "r.csv"));
        CHECK(fs::exists(dir / "r.svg"));
        for (const auto& e : fs::recursive_directory_iterator(dir))
            CHECK(e.path().string().find(".tmp-") == std::string::npos);
        std::ifstream in(dir / "sub" / "r.json");
        const Json j = Json::parse(in);
        CHECK(j["rows"][0]["exact"] == "3/4");
        CHECK(resolve_output_path("r.json") == fs::path("r.json"));
    }
    SUBCASE("unwritable path") {
        CHECK_THROWS_AS(write_file_atomic("/proc/rmprod-no-such-dir/x.json", "{}"), OutputError);
    }
}

TEST_CASE("run_cli exit codes") {
    std::ostringstream out, err;
    CHECK(run_cli({"oracle", "--measure", "rademacher"}, out, err) == kExitOk);
    CHECK(out.str().find("\"3/4\"") != std::string::npos);
    CHECK(run_cli({"estimate", "--k", "9"}, out, err) == kExitBadInput);
    CHECK(run_cli({"estimate", "--measure", "atomic", "--atoms", "1:1/2,2:1/4"}, out, err) == kExitBadInput);
    CHECK(err.str().find("mass sum") != std::string::npos);
    CHECK(run_cli({"oracle", "--measure", "rademacher", "--n", "4", "--route", "tuples", "--budget", "10"}, out, err) ==
          kExitBudgetExceeded);
    CHECK(run_cli({}, out, err) == kExitBadInput);
    CHECK(run_cli({"--help"}, out, err) == kExitOk);
}
