#pragma once

#include "censreg/inner_fit.hpp"
#include "censreg/km.hpp"
#include "censreg/loss.hpp"
#include "censreg/scale.hpp"
#include "censreg/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace censreg {

enum class MetricKind { identity, mad_diagonal };

// Configuration of the resampling search and the default loss pair.
struct SearchConfig {
    std::size_t n_candidates = 500;
    std::uint64_t seed = 0;
    std::uint64_t rng_stream_id = 0;
    MetricKind metric = MetricKind::identity;
    bool refine = false;     // post-search polish; off reproduces pure candidate selection
    bool prune = true;       // the kappa-pruned inner scan; exact either way
    double b_over_a = 0.5;   // M-scale target as a fraction of sup(rho1)
    double c1 = kDefaultInitialTuning;    // initial-stage bisquare tuning
    double c2 = kDefaultEfficientTuning;  // efficient-stage bisquare tuning
    double scale_tol = 1e-12;
    int scale_max_iter = 200;
    double irwls_tol = 1e-10;
    int irwls_max_iter = 500;
};

// Exact fits of size-p subsamples with nonsingular design.
struct CandidateSet {
    std::vector<std::vector<double>> betas;
    std::vector<std::vector<std::size_t>> subsamples;  // provenance
    std::size_t size() const { return betas.size(); }
};

CandidateSet generate_candidates(const CensoredSample& sample, const SearchConfig& cfg);

// Diagonal quadratic form used for the outer objective coef'A coef.
std::vector<double> metric_diagonal(const CensoredSample& sample, MetricKind kind);

// Scale-minimizing estimators (initial stage). `rho1` bounded, target
// b = b_over_a * sup(rho1) unless given explicitly.
FitResult s_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                     const LossFunction& rho1, double b);
FitResult s_estimate(const CensoredSample& sample, const SearchConfig& cfg);

// Jump-loss specialization with b = 1/2 (least median of absolute residuals).
FitResult lms_estimate(const CensoredSample& sample, const SearchConfig& cfg);

// Efficient refinement stage launched from the initial scale estimate.
FitResult mm_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                      const LossFunction& rho1, const LossFunction& rho2, double b);
FitResult mm_estimate(const CensoredSample& sample, const SearchConfig& cfg);

FitResult tau_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                       const LossFunction& rho1, const LossFunction& rho2, double b);
FitResult tau_estimate(const CensoredSample& sample, const SearchConfig& cfg);

// Fixed-scale M-estimator: outer search over candidates, inner IRWLS fit.
FitResult m_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                     const LossFunction& rho, double fixed_scale);

// Least squares with conditional-mean imputation of censored responses,
// iterated to a fixed point.
FitResult buckley_james_ls(const CensoredSample& sample, const SearchConfig& cfg);

// L1: outer candidate search with a convex weighted-L1 inner fit.
FitResult l1_estimate(const CensoredSample& sample, const SearchConfig& cfg);

// Sign-score generalized M estimator for simple regression (p = 2 with
// intercept): slope solves a one-dimensional score equation by bisection,
// intercept is the median of the residual distribution at the fitted slope.
FitResult gm_estimate(const CensoredSample& sample, const SearchConfig& cfg);

enum class EstimatorKind { ls, l1, lms, s, mm, tau, m, gm };

const char* estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

// Dispatcher. The fixed-scale M estimator derives its scale from an initial
// S fit with the same configuration.
FitResult fit(const CensoredSample& sample, EstimatorKind kind, const SearchConfig& cfg);

}  // namespace censreg
