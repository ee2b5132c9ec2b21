#pragma once

#include "censreg/km.hpp"
#include "censreg/loss.hpp"
#include "censreg/types.hpp"

#include <span>
#include <vector>

namespace censreg {

// Configuration of the M-scale equation: find s with
//   sum_k w_k * loss((v_k) / s) = target,
// where target lies strictly between 0 and sup(loss).
struct ScaleConfig {
    LossFunction loss = LossFunction::bisquare(kDefaultInitialTuning);
    double target = 0.5 * LossFunction::bisquare(kDefaultInitialTuning).sup();
    double tol = 1e-10;  // relative bisection tolerance
    int max_iter = 200;

    static ScaleConfig make(const LossFunction& loss, double b_over_a) {
        ScaleConfig cfg;
        cfg.loss = loss;
        cfg.target = calibrate_b(loss, b_over_a);
        return cfg;
    }
};

struct ScaleResult {
    double value = 0.0;
    bool exact_fit = false;  // no positive root: too much mass at zero
    bool converged = true;   // false only when bracketing hit its expansion cap
    explicit operator double() const { return value; }
};

// Core solver on flat arrays. `ref_magnitude` sets the numeric zero for the
// exact-fit test (values below 1e-12 * ref count as zero); pass the magnitude
// of the unshifted data so cancellation noise in exact fits is recognized.
// Negative ref means "derive from max |v|".
ScaleResult solve_m_scale(std::span<const double> v, std::span<const double> w,
                          const ScaleConfig& cfg, double ref_magnitude = -1.0,
                          SearchStats* stats = nullptr);

// tau-scale on flat arrays: s * sqrt(sum_k w_k * rho2(v_k / s)).
ScaleResult solve_tau_scale(std::span<const double> v, std::span<const double> w,
                            const ScaleConfig& cfg, const LossFunction& rho2,
                            double ref_magnitude = -1.0, SearchStats* stats = nullptr);

// Reusable scratch holding the shifted atom values v_k = value_k - gamma'x_i
// for a candidate inner coefficient vector.
class ShiftedAtoms {
public:
    void build(const RedistributionWeights& weights, const CensoredSample& sample,
               std::span<const double> gamma);

    std::span<const double> values() const { return {values_.data(), values_.size()}; }
    std::span<const double> weights() const { return {weights_->data(), weights_->size()}; }
    double ref_magnitude() const { return ref_; }

private:
    std::vector<double> values_;
    std::vector<double> shifts_;
    const std::vector<double>* weights_ = nullptr;
    double ref_ = 0.0;
};

// M-scale of the shifted residual distribution at inner coefficients gamma.
ScaleResult m_scale(const RedistributionWeights& weights, const CensoredSample& sample,
                    std::span<const double> gamma, const ScaleConfig& cfg,
                    SearchStats* stats = nullptr);

// tau-scale, Eq-style composite of the M-scale and a second bounded loss.
// Requires rho2/sup(rho2) <= rho1/sup(rho1) pointwise (checked on a grid).
ScaleResult tau_scale(const RedistributionWeights& weights, const CensoredSample& sample,
                      std::span<const double> gamma, const ScaleConfig& cfg,
                      const LossFunction& rho2, SearchStats* stats = nullptr);

// Grid check that rho_a/sup <= rho_b/sup pointwise (normalized units).
bool normalized_loss_dominated(const LossFunction& smaller, const LossFunction& larger,
                               double tol = 1e-12);

// sum_k w_k * loss(v_k / s); the bisquare path streams the SIMD kernels.
double weighted_loss_sum(const LossFunction& loss, std::span<const double> v,
                         std::span<const double> w, double s);

// True when the M-scale of (v, w) is zero: too much mass within numeric zero
// of the origin for the equation to have a positive root.
bool scale_is_exact_zero(const LossFunction& loss, double target,
                         std::span<const double> v, std::span<const double> w,
                         double ref_magnitude);

}  // namespace censreg
