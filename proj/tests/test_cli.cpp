#include <doctest.h>

#include "censreg/rng.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using json = nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string command = std::string(CENSREG_CLI_PATH) + " " + args +
                                " 2>/dev/null";
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buffer[4096];
    while (std::size_t got = fread(buffer, 1, sizeof buffer, pipe))
        result.output.append(buffer, got);
    const int status = pclose(pipe);
    result.exit_code = WEXITSTATUS(status);
    return result;
}

std::string write_toy_file(const std::string& name, bool with_outliers) {
    const std::string path = std::string("/tmp/") + name;
    std::ofstream file(path);
    file << "time,status,age\n";
    censreg::StreamRng rng(2024);
    for (int i = 0; i < 60; ++i) {
        const double age = 30.0 + 25.0 * rng.uniform();
        double log_t = 5.0 - 0.05 * age + 0.4 * rng.normal();
        int status = 1;
        const double censor = 5.0 - 0.05 * age + 0.2 + 0.4 * rng.normal();
        if (censor < log_t) {
            log_t = censor;
            status = 0;
        }
        file << std::exp(log_t) << "," << status << "," << age << "\n";
    }
    if (with_outliers) {
        // two young early deaths, far below the line
        file << std::exp(1.0) << ",1,20\n";
        file << std::exp(0.8) << ",1,22\n";
    }
    return path;
}

}  // namespace

TEST_CASE("fit: uncensored least squares equals the textbook fit and round-trips") {
    const std::string path = "/tmp/censreg_ls_toy.csv";
    {
        std::ofstream file(path);
        file << "y,status,x\n";
        file << "1,1,0\n2,1,1\n2.9,1,2\n4.2,1,3\n5,1,4\n";
    }
    const auto run = run_cli("fit " + path +
                             " --response y --status status --covariates x "
                             "--estimator ls");
    REQUIRE(run.exit_code == 0);
    const json out = json::parse(run.output);
    // direct normal equations on the five points: Sxy/Sxx = 10.2/10
    CHECK(out["beta"]["x"].get<double>() == doctest::Approx(1.02).epsilon(1e-9));
    CHECK(out["beta"]["(intercept)"].get<double>() ==
          doctest::Approx(0.98).epsilon(1e-7));
    CHECK(out["n"] == 5);
    CHECK(out["m"] == 0);
    CHECK(out["converged"].get<bool>());
    // round-trip: serialized doubles parse back to identical values
    const json again = json::parse(out.dump());
    CHECK(again["beta"]["x"].get<double>() == out["beta"]["x"].get<double>());
    CHECK(again["scale"].get<double>() == out["scale"].get<double>());
}

TEST_CASE("fit: robust fit resists the two early deaths that drag least squares") {
    const std::string path = write_toy_file("censreg_heart_toy.csv", true);
    const std::string common = " --response time --status status --covariates age "
                               "--log-response --seed 11 --n-candidates 200";
    const auto mm = run_cli("fit " + path + common + " --estimator mm");
    const auto ls = run_cli("fit " + path + common + " --estimator ls");
    REQUIRE(mm.exit_code == 0);
    REQUIRE(ls.exit_code == 0);
    const double mm_slope = json::parse(mm.output)["beta"]["age"].get<double>();
    const double ls_slope = json::parse(ls.output)["beta"]["age"].get<double>();
    // least squares is dragged toward the outliers; the robust slope stays
    // near the generating value -0.05
    CHECK(std::abs(mm_slope - (-0.05)) < 0.02);
    CHECK(std::abs(ls_slope - mm_slope) > 0.01);

    // removing the flagged rows reconciles least squares with the robust fit
    const std::string clean = write_toy_file("censreg_heart_clean.csv", false);
    const auto ls2 = run_cli("fit " + clean + common + " --estimator ls");
    REQUIRE(ls2.exit_code == 0);
    const double ls2_slope = json::parse(ls2.output)["beta"]["age"].get<double>();
    CHECK(std::abs(ls2_slope - mm_slope) < 0.02);
}

TEST_CASE("fit: usage errors produce machine-readable output and exit code 2") {
    const std::string path = write_toy_file("censreg_err_toy.csv", false);
    const auto missing = run_cli("fit " + path +
                                 " --response time --status nosuch --covariates age");
    CHECK(missing.exit_code == 2);
    const json err = json::parse(missing.output);
    CHECK(err["error"]["type"] == "data");

    const auto no_file = run_cli("fit /tmp/definitely_missing.csv --response a "
                                 "--status b --covariates c");
    CHECK(no_file.exit_code == 2);
}

TEST_CASE("simulate: table 1 yields six records, deterministic under a seed") {
    const std::string args =
        "simulate --table 1 --replicates 3 --seed 5 --n-candidates 40 --threads 2";
    const auto first = run_cli(args);
    REQUIRE(first.exit_code == 0);
    const json records = json::parse(first.output);
    CHECK(records.size() == 6);
    for (const auto& record : records) {
        CHECK(record["replicates"] == 3);
        CHECK(record["x0"].is_null());
    }
    const auto second = run_cli(args);
    CHECK(first.output == second.output);
}

TEST_CASE("simulate: a contaminated table emits the full estimator-by-cell grid") {
    const auto run = run_cli(
        "simulate --table 3 --replicates 2 --seed 5 --n-candidates 40 "
        "--estimators ls,mm --threads 2");
    REQUIRE(run.exit_code == 0);
    const json records = json::parse(run.output);
    CHECK(records.size() == 2 * 7);
    CHECK(records[0]["x0"].get<double>() == 10.0);
}

TEST_CASE("breakdown: bound matches the worked arithmetic and rejects bad input") {
    // build a file with 100 rows, 32 censored
    const std::string path = "/tmp/censreg_bd_toy.csv";
    {
        std::ofstream file(path);
        file << "y,status,x\n";
        censreg::StreamRng rng(8);
        for (int i = 0; i < 100; ++i)
            file << rng.normal() << "," << (i < 32 ? 0 : 1) << "," << rng.normal()
                 << "\n";
    }
    const auto run = run_cli("breakdown " + path +
                             " --response y --status status --covariates x "
                             "--b-over-a 0.5");
    REQUIRE(run.exit_code == 0);
    const json out = json::parse(run.output);
    CHECK(out["q"] == 1);
    CHECK(out["m"] == 32);
    CHECK(out["gamma_bound"].get<double>() == doctest::Approx(0.17));
    CHECK(out["optimal_bound"].get<double>() == doctest::Approx(0.175));

    const auto bad = run_cli("breakdown " + path +
                             " --response y --status status --covariates x "
                             "--b-over-a 0");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("curve: grid size, argmin and edge flag") {
    const std::string path = "/tmp/censreg_curve_toy.csv";
    {
        std::ofstream file(path);
        file << "y,status,x\n";
        censreg::StreamRng rng(21);
        for (int i = 0; i < 120; ++i) {
            const double x = rng.normal();
            const double y = 1.5 * x + rng.normal();
            const double c = rng.normal(1.0, 1.0);
            file << std::min(y, c) << "," << (y <= c ? 1 : 0) << "," << x << "\n";
        }
    }
    const auto run = run_cli("curve " + path +
                             " --response y --status status --covariates x "
                             "--grid-min 0 --grid-max 3 --grid-steps 3 --seed 4 "
                             "--n-candidates 120");
    REQUIRE(run.exit_code == 0);
    const json out = json::parse(run.output);
    CHECK(out["rows"].size() == 3);

    const auto fine = run_cli("curve " + path +
                              " --response y --status status --covariates x "
                              "--grid-min 0 --grid-max 3 --grid-steps 31 --seed 4 "
                              "--n-candidates 120");
    REQUIRE(fine.exit_code == 0);
    const json fout = json::parse(fine.output);
    CHECK(std::abs(fout["argmin_beta"].get<double>() - 1.5) <= 0.3);
    CHECK_FALSE(fout["edge_minimum"].get<bool>());

    // a grid that misses the optimum flags the edge
    const auto off = run_cli("curve " + path +
                             " --response y --status status --covariates x "
                             "--grid-min 2 --grid-max 3 --grid-steps 5 --seed 4 "
                             "--n-candidates 120");
    REQUIRE(off.exit_code == 0);
    CHECK(json::parse(off.output)["edge_minimum"].get<bool>());
}
