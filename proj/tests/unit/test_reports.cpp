#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "surfdyn/errors.hpp"
#include "surfdyn/reports.hpp"

using namespace surfdyn;
using nlohmann::json;

namespace {

const double kCatLog = std::log((3.0 + std::sqrt(5.0)) / 2.0);

json combi_config(std::uint64_t seed = 5) {
    return {{"schema", kConfigSchema},
            {"seed", seed},
            {"pipelines", json::array({{{"name", "combi"}, {"n", 2}, {"S", 2}}})}};
}

std::string schema_message(const json& config) {
    try {
        validate_config(config);
    } catch (const SchemaError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("bounds_from_inputs") {
    const auto cat = bounds_from_inputs(kCatLog, kCatLog, 2.0);
    CHECK(cat.sexent_bound_localdiffeo == doctest::Approx(2 * kCatLog));
    CHECK(cat.sexent_bound_general == doctest::Approx(5 * kCatLog));
    CHECK(cat.tail_bound == doctest::Approx(kCatLog / 2));
    CHECK(cat.buzzi_bound == doctest::Approx(kCatLog));
    CHECK(std::abs(cat.sexent_bound_localdiffeo - 1.9248) < 1e-4);
    CHECK(std::abs(cat.tail_bound - 0.4812) < 1e-4);

    const auto id = bounds_from_inputs(0.0, 0.0, 3.0);
    CHECK(id.sexent_bound_general == 0.0);
    CHECK(id.tail_bound == 0.0);

    const auto dbl = bounds_from_inputs(2 * std::log(2.0), std::log(2.0), 2.0);
    CHECK(dbl.sexent_bound_general == doctest::Approx(6 * std::log(2.0)));
    CHECK(dbl.sexent_bound_localdiffeo == doctest::Approx(3 * std::log(2.0)));

    CHECK_THROWS_AS(bounds_from_inputs(1.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(bounds_from_inputs(1.0, 1.0, 0.5), PreconditionError);
}

TEST_CASE("measure_level_bound") {
    CHECK(measure_level_bound(kCatLog, kCatLog, 2.0, BoundMode::Diffeo) == doctest::Approx(kCatLog));
    CHECK(std::abs(measure_level_bound(kCatLog, kCatLog, 2.0, BoundMode::Diffeo) - 0.9624) < 1e-4);
    CHECK(measure_level_bound(0.0, 0.0, 2.0, BoundMode::General) == 0.0);
    CHECK(measure_level_bound(std::log(2.0), 2 * std::log(2.0), 3.0, BoundMode::General) ==
          doctest::Approx(2 * std::log(2.0)));
}

TEST_CASE("exit_code_for") {
    CHECK(exit_code_for(SchemaError("x")) == ExitCode::Schema);
    CHECK(exit_code_for(PreconditionError("x")) == ExitCode::Precondition);
    CHECK(exit_code_for(DomainError("x")) == ExitCode::Precondition);
    CHECK(exit_code_for(BudgetError("x")) == ExitCode::Budget);
    CHECK(exit_code_for(EscapeError(3, "x")) == ExitCode::Budget);
}

TEST_CASE("validate_config") {
    CHECK_NOTHROW(validate_config(combi_config()));

    json no_seed = combi_config();
    no_seed.erase("seed");
    CHECK(schema_message(no_seed).find("$.seed") != std::string::npos);

    json empty = combi_config();
    empty["pipelines"] = json::array();
    CHECK(schema_message(empty).find("$.pipelines") != std::string::npos);

    json unknown = combi_config();
    unknown["pipelines"][0]["colour"] = 1;
    CHECK(schema_message(unknown).find("$.pipelines[0].colour") != std::string::npos);

    json bad_type = combi_config();
    bad_type["pipelines"][0]["n"] = -2;
    CHECK(schema_message(bad_type).find("$.pipelines[0].n") != std::string::npos);

    json bad_system = {{"schema", kConfigSchema},
                       {"seed", 1},
                       {"pipelines", json::array({{{"name", "lyapunov"}, {"system", {{"name", "nope"}}}}})}};
    CHECK(schema_message(bad_system).find("$.pipelines[0].system.name") != std::string::npos);

    json version = combi_config();
    version["schema"] = "surfdyn-config-v0";
    CHECK(schema_message(version).find("$.schema") != std::string::npos);
}

TEST_CASE("load_config reports the position of syntax errors") {
    const auto path = std::filesystem::temp_directory_path() / "surfdyn_bad_config.json";
    {
        std::ofstream out(path);
        out << "{\n  \"seed\": 1,\n  oops\n}\n";
    }
    try {
        load_config(path);
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config("/nonexistent/surfdyn.json"), SchemaError);
}

TEST_CASE("run_experiment: combi and determinism") {
    const auto a = run_experiment(combi_config());
    const auto& res = a.report.at("results").at(0);
    CHECK(a.report.at("schema") == kReportSchema);
    CHECK(res.at("result").at("count") == "6");
    CHECK(res.at("result").at("holds") == true);
    CHECK(res.at("result").at("enumeration_matches") == true);
    CHECK(a.tables.count("combi_bound.csv") == 1);

    const auto b = run_experiment(combi_config());
    CHECK(dump_report(a.report) == dump_report(b.report));
    CHECK(a.tables == b.tables);

    json two = combi_config();
    two["pipelines"].push_back({{"name", "combi"}, {"n", 3}, {"S", 1}});
    const auto c = run_experiment(two);
    CHECK(c.tables.count("combi_0_bound.csv") == 1);
    CHECK(c.tables.count("combi_1_bound.csv") == 1);
    CHECK(c.report.at("results").at(1).at("result").at("count") == "1");
}

TEST_CASE("run_experiment: seeded pipelines are reproducible") {
    const json cfg = {{"schema", kConfigSchema},
                      {"seed", 11},
                      {"pipelines", json::array({{{"name", "entropy"},
                                                  {"system", {{"name", "cat"}}},
                                                  {"pool", {{"kind", "random"}, {"size", 1500}}},
                                                  {"n_range", {1, 2, 3, 4}},
                                                  {"delta", 0.2}},
                                                 {{"name", "oscille"}, {"count", 3}, {"grid", 2001}}})}};
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(dump_report(a.report) == dump_report(b.report));
    CHECK(a.tables == b.tables);
    json other = cfg;
    other["seed"] = 12;
    CHECK(dump_report(run_experiment(other).report) != dump_report(a.report));
}

TEST_CASE("run_experiment: bounds rejects r <= 1") {
    const json cfg = {{"schema", kConfigSchema},
                      {"seed", 1},
                      {"pipelines", json::array({{{"name", "bounds"}, {"system", {{"name", "cat"}}}, {"r", 1.0}}})}};
    CHECK_THROWS_AS(run_experiment(cfg), PreconditionError);
}

TEST_CASE("write_bundle") {
    const auto dir = std::filesystem::temp_directory_path() / "surfdyn_bundle_test";
    std::filesystem::remove_all(dir);
    const auto bundle = run_experiment(combi_config());
    write_bundle(bundle, dir, {{"note", "unit"}});
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "combi_bound.csv"));
    CHECK(std::filesystem::exists(dir / "metadata.json"));
    std::ifstream in(dir / "report.json");
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == dump_report(bundle.report));
    std::filesystem::remove_all(dir);
}
