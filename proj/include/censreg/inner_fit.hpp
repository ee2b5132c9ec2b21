#pragma once

#include "censreg/km.hpp"
#include "censreg/loss.hpp"
#include "censreg/scale.hpp"
#include "censreg/types.hpp"

#include <span>
#include <vector>

namespace censreg {

// Inner regression problem: fit coefficients to the weighted joint
// distribution of (residual, covariate) built at a fixed outer coefficient
// vector. `scale` is the fixed residual scale for M-type objectives.
struct InnerProblem {
    const RedistributionWeights* weights = nullptr;
    const CensoredSample* sample = nullptr;
    double scale = 1.0;
    LossFunction loss = LossFunction::bisquare(kDefaultEfficientTuning);
};

struct IRWLSConfig {
    double tol = 1e-8;    // stop when step norm <= tol * (1 + |coef|)
    int max_iter = 500;
    double ridge = 1e-12; // tiny diagonal added to the normal equations
    bool record_trace = false;
};

struct InnerFitResult {
    std::vector<double> coef;
    double objective = 0.0;
    int iterations = 0;
    bool converged = true;
    std::vector<double> objective_trace;  // filled when record_trace is set
};

// sum over atoms of weight * loss((value - coef'x) / scale).
double c_objective(const InnerProblem& prob, std::span<const double> coef);

// Iteratively reweighted least squares from coef = 0. Atom weights are
// loss.weight(t) * mass with t the standardized shifted residual; each sweep
// solves the p x p weighted normal equations over the sparse atom list. The
// returned coefficients never have a larger objective than the start.
InnerFitResult irwls_minimize(const InnerProblem& prob, const IRWLSConfig& cfg);

// Evaluate the M-scale at each candidate inner coefficient vector and return
// the minimizer (ties broken by lowest index). With `refine` set, up to 20
// IRWLS steps at the winning scale are applied, each kept only if the scale
// criterion does not increase.
struct InnerSelection {
    std::vector<double> coef;
    double criterion = 0.0;  // winning scale (or tau)
    std::size_t index = 0;
    bool exact_fit = false;
};

InnerSelection s_inner(const InnerProblem& prob,
                       const std::vector<std::vector<double>>& candidates,
                       const ScaleConfig& cfg, bool refine = false,
                       SearchStats* stats = nullptr);

InnerSelection tau_inner(const InnerProblem& prob,
                         const std::vector<std::vector<double>>& candidates,
                         const ScaleConfig& cfg, const LossFunction& rho2,
                         bool refine = false, SearchStats* stats = nullptr);

// Weighted L1 inner fit by smoothed IRLS (smoothing 1e-6 times the median
// absolute atom value). Convex, so no candidate list is needed.
InnerFitResult weighted_l1_minimize(const RedistributionWeights& weights,
                                    const CensoredSample& sample, double tol = 1e-10,
                                    int max_iter = 200);

}  // namespace censreg
