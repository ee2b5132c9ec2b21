// censreg: robust regression for right-censored responses.
//
// Subcommands: fit, simulate, breakdown, curve. JSON goes to stdout, human
// summaries to stderr. Exit codes: 0 ok, 1 numerical failure, 2 usage or
// data error.

#include "censreg/breakdown.hpp"
#include "censreg/dataset.hpp"
#include "censreg/estimators.hpp"
#include "censreg/kernels.hpp"
#include "censreg/rng.hpp"
#include "censreg/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

using json = nlohmann::ordered_json;

namespace {

struct CommonDataOptions {
    std::string path;
    std::string response = "time";
    std::string status = "status";
    std::string covariates;
    std::string delimiter = ",";
    bool log_response = false;
    bool intercept = true;
};

void add_data_options(CLI::App* cmd, CommonDataOptions& opts) {
    cmd->add_option("input", opts.path, "delimited data file with header")->required();
    cmd->add_option("--response", opts.response, "response column");
    cmd->add_option("--status", opts.status, "status column (1 observed, 0 censored)");
    cmd->add_option("--covariates", opts.covariates, "comma-separated covariate columns")
        ->required();
    cmd->add_option("--delimiter", opts.delimiter, "field delimiter (default ,)");
    cmd->add_flag("--log-response", opts.log_response, "fit log(response)");
    cmd->add_flag("--intercept,!--no-intercept", opts.intercept,
                  "include an intercept column (default on)");
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream stream(csv);
    while (std::getline(stream, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

censreg::BuiltSample load_sample(const CommonDataOptions& opts) {
    if (opts.delimiter.size() != 1)
        throw censreg::DataError("delimiter must be a single character");
    const censreg::DataTable table = censreg::load_delimited(opts.path, opts.delimiter[0]);
    censreg::SampleSpec spec;
    spec.response = opts.response;
    spec.status = opts.status;
    spec.covariates = split_list(opts.covariates);
    spec.intercept = opts.intercept;
    spec.log_response = opts.log_response;
    return censreg::build_sample(table, spec);
}

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("CENSREG_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

json fit_to_json(const censreg::FitResult& fit,
                 const std::vector<std::string>& names) {
    json beta = json::object();
    for (std::size_t j = 0; j < fit.beta.size(); ++j)
        beta[names.at(j)] = fit.beta[j];
    json out;
    out["beta"] = beta;
    out["scale"] = fit.scale;
    out["objective"] = fit.objective;
    out["converged"] = fit.converged;
    out["exact_fit"] = fit.exact_fit;
    out["n_candidates_evaluated"] = fit.n_candidates_evaluated;
    return out;
}

censreg::SimulationScenario scenario_from_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw censreg::DataError("cannot open scenario file '" + path + "'");
    censreg::SimulationScenario scn;
    censreg::Contamination contam;
    bool contaminated = false;
    std::string line;
    while (std::getline(file, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto first = s.find_first_not_of(" \t\r");
            const auto last = s.find_last_not_of(" \t\r");
            return first == std::string::npos ? std::string()
                                              : s.substr(first, last - first + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (key == "n") scn.n = std::stoul(value);
        else if (key == "replicates") scn.replicates = std::stoul(value);
        else if (key == "seed") scn.seed = std::stoull(value);
        else if (key == "censor_mean") scn.censor_mean = std::stod(value);
        else if (key == "censor_sd") scn.censor_sd = std::stod(value);
        else if (key == "beta0") {
            scn.beta0.clear();
            for (const auto& item : split_list(value)) scn.beta0.push_back(std::stod(item));
        } else if (key == "contam_count") {
            contam.count = std::stoul(value);
            contaminated = true;
        } else if (key == "contam_x0") {
            contam.x0 = std::stod(value);
            contaminated = true;
        } else if (key == "contam_m") {
            contam.slope = std::stod(value);
            contaminated = true;
        } else {
            throw censreg::DataError("unknown scenario key '" + key + "'");
        }
    }
    if (contaminated) scn.contamination = contam;
    return scn;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust regression estimators for right-censored responses"};
    app.require_subcommand(1);

    // fit ------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit one estimator to a data file");
    CommonDataOptions fit_data;
    add_data_options(fit_cmd, fit_data);
    std::string estimator = "mm";
    censreg::SearchConfig cfg;
    int threads_flag = 0;
    fit_cmd->add_option("--estimator", estimator,
                        "one of ls l1 lms s mm tau m gm");
    fit_cmd->add_option("--n-candidates", cfg.n_candidates, "resampling candidates");
    fit_cmd->add_option("--seed", cfg.seed, "random seed");
    fit_cmd->add_option("--b-over-a", cfg.b_over_a, "M-scale target fraction");
    fit_cmd->add_option("--c1", cfg.c1, "initial-stage bisquare tuning constant");
    fit_cmd->add_option("--c2", cfg.c2, "efficient-stage bisquare tuning constant");
    fit_cmd->add_flag("--refine", cfg.refine, "post-search polish");
    std::string metric = "identity";
    fit_cmd->add_option("--a-n", metric, "outer metric: identity or mad");
    fit_cmd->add_option("--threads", threads_flag, "worker threads");

    // simulate --------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study tables");
    int table = 1;
    std::size_t replicates = 200;
    std::uint64_t sim_seed = 1;
    std::string estimators_csv = "s,lms,ls,mm,gm,l1";
    bool full = false;
    std::string scenario_path;
    int sim_threads_flag = 0;
    std::size_t sim_candidates = 500;
    sim_cmd->add_option("--table", table, "study table: 1 clean, 2 x0=1, 3 x0=10")
        ->check(CLI::Range(1, 3));
    sim_cmd->add_option("--replicates", replicates, "replicates per cell");
    sim_cmd->add_option("--seed", sim_seed, "random seed");
    sim_cmd->add_option("--estimators", estimators_csv, "comma-separated estimators");
    sim_cmd->add_flag("--full", full, "1000 replicates per cell");
    sim_cmd->add_option("--scenario", scenario_path, "flat key=value scenario file");
    sim_cmd->add_option("--threads", sim_threads_flag, "worker threads");
    sim_cmd->add_option("--n-candidates", sim_candidates, "resampling candidates");

    // breakdown --------------------------------------------------------------
    auto* bd_cmd = app.add_subcommand("breakdown", "breakdown-point lower bound");
    CommonDataOptions bd_data;
    add_data_options(bd_cmd, bd_data);
    double b_over_a = 0.5;
    std::uint64_t q_budget = 1000000;
    bd_cmd->add_option("--b-over-a", b_over_a, "M-scale target fraction");
    bd_cmd->add_option("--q-budget", q_budget, "subset budget for the exact q search");

    // curve ------------------------------------------------------------------
    auto* curve_cmd = app.add_subcommand("curve", "objective curve over a slope grid");
    CommonDataOptions curve_data;
    add_data_options(curve_cmd, curve_data);
    double grid_min = 0.0, grid_max = 3.0;
    std::size_t grid_steps = 61;
    censreg::SearchConfig curve_cfg;
    curve_cmd->add_option("--grid-min", grid_min, "first slope");
    curve_cmd->add_option("--grid-max", grid_max, "last slope");
    curve_cmd->add_option("--grid-steps", grid_steps, "grid points");
    curve_cmd->add_option("--n-candidates", curve_cfg.n_candidates,
                          "candidates for the scale stage");
    curve_cmd->add_option("--seed", curve_cfg.seed, "random seed");
    curve_cmd->add_option("--c2", curve_cfg.c2, "loss tuning constant for the curve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        json err;
        err["error"] = {{"type", "usage"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*fit_cmd) {
            const auto t0 = std::chrono::steady_clock::now();
            if (metric == "mad")
                cfg.metric = censreg::MetricKind::mad_diagonal;
            else if (metric != "identity")
                throw censreg::DataError("--a-n must be identity or mad");
            (void)resolve_threads(threads_flag);  // estimator fits are single-threaded

            const censreg::BuiltSample built = load_sample(fit_data);
            const censreg::SampleDiagnostics diag = censreg::validate(built.sample);
            const censreg::FitResult result =
                censreg::fit(built.sample, censreg::estimator_from_name(estimator), cfg);

            json out = fit_to_json(result, built.coefficient_names);
            out["estimator"] = estimator;
            out["n"] = diag.n;
            out["m"] = diag.censored;
            out["seed"] = cfg.seed;
            out["elapsed_sec"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            std::cout << out.dump() << "\n";
            std::cerr << estimator << " fit: n=" << diag.n << " m=" << diag.censored
                      << " scale=" << result.scale << "\n";
            return 0;
        }

        if (*sim_cmd) {
            censreg::SimulationScenario scn;
            if (!scenario_path.empty()) scn = scenario_from_file(scenario_path);
            scn.seed = sim_seed;
            scn.replicates = full ? 1000 : replicates;

            censreg::SearchConfig sim_cfg;
            sim_cfg.n_candidates = sim_candidates;
            sim_cfg.seed = sim_seed;
            const int threads = resolve_threads(sim_threads_flag);

            std::vector<censreg::EstimatorKind> kinds;
            for (const auto& name : split_list(estimators_csv))
                kinds.push_back(censreg::estimator_from_name(name));
            if (kinds.empty()) throw censreg::DataError("no estimators selected");

            std::vector<std::optional<censreg::Contamination>> cells;
            if (table == 1) {
                cells.emplace_back(std::nullopt);
            } else {
                const double x0 = table == 2 ? 1.0 : 10.0;
                for (double m : censreg::contamination_slope_grid())
                    cells.emplace_back(censreg::Contamination{10, x0, m});
            }

            json records = json::array();
            for (const auto& cell : cells) {
                censreg::SimulationScenario cell_scn = scn;
                cell_scn.contamination = cell;
                const censreg::SimulationResult result =
                    censreg::run_table(cell_scn, kinds, sim_cfg, threads);
                for (const auto& est : result.estimators) {
                    json record;
                    record["estimator"] = est.name;
                    record["mse"] = est.mse;
                    record["n_fail"] = est.n_fail;
                    record["replicates"] = result.replicates;
                    record["seed"] = result.seed;
                    record["table"] = table;
                    if (cell) {
                        record["x0"] = cell->x0;
                        record["m"] = cell->slope;
                    } else {
                        record["x0"] = nullptr;
                        record["m"] = nullptr;
                    }
                    record["censoring_rate"] = result.censoring_rate;
                    record["rng"] = censreg::StreamRng::algorithm();
                    record["kernels"] = censreg::kernels::active_implementation();
                    records.push_back(std::move(record));
                    std::cerr << "table " << table << " "
                              << (cell ? "m=" + std::to_string(cell->slope) : "clean")
                              << " " << est.name << ": mse=" << est.mse << "\n";
                }
            }
            std::cout << records.dump() << "\n";
            return 0;
        }

        if (*bd_cmd) {
            const censreg::BuiltSample built = load_sample(bd_data);
            const censreg::BreakdownReport report =
                censreg::breakdown_bound(built.sample, b_over_a, q_budget);
            json out;
            out["n"] = report.n;
            out["p"] = report.p;
            out["q"] = report.q;
            out["q_exact"] = report.q_exact;
            out["m"] = report.censored;
            out["b_over_a"] = report.b_over_a;
            out["k0"] = report.k0;
            out["gamma_bound"] = report.gamma_bound;
            out["optimal_bound"] = report.optimal_bound;
            std::cout << out.dump() << "\n";
            std::cerr << "breakdown bound " << report.gamma_bound << " (q=" << report.q
                      << ", m=" << report.censored << ")\n";
            return 0;
        }

        if (*curve_cmd) {
            if (grid_steps < 2) throw censreg::DataError("need at least two grid steps");
            const censreg::BuiltSample built = load_sample(curve_data);
            if (built.sample.p() != 2)
                throw censreg::DataError("curve requires exactly one covariate plus intercept");

            const censreg::FitResult initial =
                censreg::s_estimate(built.sample, curve_cfg);
            if (initial.scale <= 0.0)
                throw censreg::NumericalError("degenerate scale; curve undefined");

            censreg::CurveConfig ccfg;
            ccfg.loss = censreg::LossFunction::bisquare(curve_cfg.c2);
            ccfg.scale = initial.scale;

            std::vector<double> grid(grid_steps);
            for (std::size_t k = 0; k < grid_steps; ++k)
                grid[k] = grid_min + (grid_max - grid_min) * static_cast<double>(k) /
                                         static_cast<double>(grid_steps - 1);
            const auto points = censreg::objective_curve(built.sample, ccfg, grid);

            std::size_t argmin = 0;
            for (std::size_t k = 1; k < points.size(); ++k)
                if (points[k].inner_norm < points[argmin].inner_norm) argmin = k;

            json rows = json::array();
            for (const auto& point : points) {
                json row;
                row["beta"] = point.slope;
                row["gamma_norm"] = point.inner_norm;
                row["score"] = point.score;
                rows.push_back(std::move(row));
            }
            json out;
            out["rows"] = rows;
            out["scale"] = initial.scale;
            out["argmin_beta"] = points[argmin].slope;
            out["edge_minimum"] = argmin == 0 || argmin + 1 == points.size();
            std::cout << out.dump() << "\n";
            std::cerr << "curve argmin near " << points[argmin].slope << "\n";
            return 0;
        }
    } catch (const censreg::NumericalError& e) {
        json err;
        err["error"] = {{"type", "numerical"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"type", "data"}, {"message", e.what()}};
        std::cout << err.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
