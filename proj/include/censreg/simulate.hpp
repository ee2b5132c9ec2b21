#pragma once

#include "censreg/estimators.hpp"
#include "censreg/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace censreg {

// Replicates are generated as y = beta0'(1, z) + u with standard normal
// covariates and errors and an independent normal censoring variable;
// contamination replaces the leading rows with fixed high- or low-leverage
// points after censoring is applied.
struct Contamination {
    std::size_t count = 10;
    double x0 = 10.0;     // covariate position of the outliers
    double slope = 4.0;   // outliers sit at (x0, slope * x0), uncensored
};

struct SimulationScenario {
    std::size_t n = 100;
    std::vector<double> beta0 = {0.0, 1.5};
    double censor_mean = 1.0;
    double censor_sd = 1.0;
    std::optional<Contamination> contamination;
    std::size_t replicates = 200;
    std::uint64_t seed = 1;
};

// Deterministic in (seed, replicate_index); the stream does not depend on
// execution order, so replicates can run on any worker.
CensoredSample generate_replicate(const SimulationScenario& scn,
                                  std::size_t replicate_index);

struct EstimatorSummary {
    std::string name;
    double mse = 0.0;            // mean squared slope error over successes
    std::size_t n_fail = 0;
    std::vector<double> slopes;  // per-replicate slopes (NaN on failure)
};

struct SimulationResult {
    std::vector<EstimatorSummary> estimators;
    double censoring_rate = 0.0;  // empirical fraction of censored rows
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    double elapsed_seconds = 0.0;
};

// Fits every estimator to every replicate and aggregates slope MSE against
// the scenario's true slope. Aborts when any estimator fails on more than 5%
// of replicates. Result is independent of `threads`.
SimulationResult run_table(const SimulationScenario& scn,
                           const std::vector<EstimatorKind>& estimators,
                           const SearchConfig& base_cfg, int threads = 1);

// The contamination grid of the study: slope multipliers 2..5 in steps of
// 0.5, at low (x0 = 1) and high (x0 = 10) leverage.
std::vector<double> contamination_slope_grid();

// Objective-curve experiment: sweep the slope over a grid with the remaining
// coordinates fixed at zero, reporting the norm of the inner coefficient fit
// and the score-equation value at each point.
struct CurveConfig {
    LossFunction loss = LossFunction::bisquare(kDefaultEfficientTuning);
    double scale = 1.0;  // fixed residual scale (from an initial S fit)
    double irwls_tol = 1e-10;
    int irwls_max_iter = 500;
};

struct CurvePoint {
    double slope = 0.0;
    double inner_norm = 0.0;  // |gamma_hat(beta)|
    double score = 0.0;       // slope component of the score equation
};

std::vector<CurvePoint> objective_curve(const CensoredSample& sample,
                                        const CurveConfig& cfg,
                                        const std::vector<double>& slope_grid);

}  // namespace censreg
