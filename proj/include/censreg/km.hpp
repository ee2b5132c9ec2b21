#pragma once

#include "censreg/types.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace censreg {

// Sparse list of atoms (u, x_i) -> mass for the weighted joint distribution
// of (residual, covariate row). `row` indexes the covariate vector of the
// observation whose conditional expectation the atom belongs to; `value` is
// the residual the mass sits on. Stored structure-of-arrays so the scale and
// objective kernels can stream it.
struct AtomList {
    std::vector<double> value;
    std::vector<double> weight;
    std::vector<std::int32_t> row;

    std::size_t size() const { return value.size(); }
    void reserve(std::size_t n) {
        value.reserve(n);
        weight.reserve(n);
        row.reserve(n);
    }
    void push(double v, double w, std::int32_t r) {
        value.push_back(v);
        weight.push_back(w);
        row.push_back(r);
    }
};

// Kaplan-Meier point masses for a censored residual vector together with the
// pairwise redistribution masses. Each censored observation's 1/n mass is
// spread over the uncensored residuals to its right proportionally to their
// KM masses; when the largest residual is censored it is treated as observed
// so the total mass stays 1 (redistribute-to-the-right terminal convention).
//
// Tie convention: at equal residual values uncensored observations precede
// censored ones, so "to the right" means strictly later in that order.
class RedistributionWeights {
public:
    // Point mass at each observation, original index order. Zero at censored
    // indices except the promoted tail point.
    const std::vector<double>& mass() const { return mass_; }
    // Residual values, original index order (copied from the input).
    const std::vector<double>& residual() const { return residual_; }
    // Event indicators after the tail promotion.
    const std::vector<std::uint8_t>& effective_event() const { return effective_event_; }
    // Original indices sorted by (residual, uncensored-first, index).
    const std::vector<std::int32_t>& order() const { return order_; }
    // Index promoted by the tail rule, or -1.
    int promoted_index() const { return promoted_; }

    const AtomList& atoms() const { return atoms_; }
    std::size_t n() const { return mass_.size(); }

    // E[g(u) | observation i]: passthrough for observed residuals, the KM
    // conditional expectation over residuals to the right for censored ones.
    double conditional_expectation(const std::function<double(double)>& g,
                                   std::size_t i) const;

    // E over the joint distribution: sum_{atoms} g(value, row) * weight.
    double expectation(const std::function<double(double, std::int32_t)>& g) const;

    // Marginal distribution function of the residual, right-continuous.
    double cdf(double t) const;

    // Lower quantile of the marginal: smallest atom with cdf >= frac.
    double marginal_quantile(double frac) const;

    friend RedistributionWeights kaplan_meier(const ResidualVector& res);

private:
    std::vector<double> mass_;
    std::vector<double> residual_;
    std::vector<std::uint8_t> effective_event_;
    std::vector<std::int32_t> order_;
    AtomList atoms_;
    int promoted_ = -1;
    // Sorted atoms of the marginal for cdf queries.
    std::vector<double> cdf_value_;
    std::vector<double> cdf_cum_;
};

RedistributionWeights kaplan_meier(const ResidualVector& res);

// Convenience: E over the joint distribution with g taking the covariate row.
double weighted_expectation(const RedistributionWeights& w, const CensoredSample& sample,
                            const std::function<double(double, std::span<const double>)>& g);

}  // namespace censreg
