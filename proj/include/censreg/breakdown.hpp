#pragma once

#include "censreg/estimators.hpp"
#include "censreg/types.hpp"

#include <cstdint>
#include <vector>

namespace censreg {

struct BreakdownReport {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t q = 0;        // max covariate rows on a hyperplane through 0
    bool q_exact = true;
    std::size_t censored = 0; // m
    double b_over_a = 0.0;
    double k0 = 0.0;          // min(n(1 - b/a) - q - m, n b/a - m)
    double gamma_bound = 0.0; // max(k0, 0) / n
    double optimal_bound = 0.0; // (n - p + 1 - 2m) / (2n)
};

// q = max over unit directions theta of #{i : theta'x_i = 0}. Exact when the
// subset enumeration fits the budget; otherwise a sampled lower bound with
// q_exact = false (which makes gamma_bound an upper bound).
std::pair<std::size_t, bool> compute_q(const CensoredSample& sample,
                                       std::uint64_t exactness_budget = 1000000,
                                       std::uint64_t seed = 0);

BreakdownReport breakdown_bound(const CensoredSample& sample, double b_over_a,
                                std::uint64_t exactness_budget = 1000000);

// Replace the first k rows with outliers of growing magnitude, refit, and
// report the coefficient displacement per magnitude. Outliers are uncensored
// high-leverage points at (x = M, y = M^2); with `location_outliers` they sit
// at the sample's covariate center with response M instead, which puts the
// censored observations between the bulk and the outliers.
struct ProbeResult {
    double baseline_norm = 0.0;
    std::vector<double> displacement;   // one per magnitude
    double max_displacement = 0.0;
};

ProbeResult empirical_breakdown_probe(const CensoredSample& sample, EstimatorKind kind,
                                      const SearchConfig& cfg, std::size_t k,
                                      const std::vector<double>& magnitudes,
                                      bool location_outliers = false);

}  // namespace censreg
