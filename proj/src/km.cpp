#include "censreg/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace censreg {

RedistributionWeights kaplan_meier(const ResidualVector& res) {
    const std::size_t n = res.size();
    if (n == 0) throw DataError("empty residual vector");
    if (res.events.size() != n)
        throw std::invalid_argument("residual/event length mismatch");
    std::size_t observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(res.values[i])) throw NumericalError("non-finite residual");
        observed += res.events[i] != 0;
    }
    if (observed == 0) throw DataError("every observation is censored");

    RedistributionWeights w;
    w.residual_ = res.values;
    w.effective_event_ = res.events;

    // Canonical order: residual ascending, uncensored before censored at
    // ties, original index as the final key.
    w.order_.resize(n);
    std::iota(w.order_.begin(), w.order_.end(), 0);
    std::sort(w.order_.begin(), w.order_.end(), [&](std::int32_t a, std::int32_t b) {
        if (res.values[a] != res.values[b]) return res.values[a] < res.values[b];
        if (res.events[a] != res.events[b]) return res.events[a] > res.events[b];
        return a < b;
    });

    // Terminal convention: the last point in canonical order absorbs its own
    // mass if censored.
    if (w.effective_event_[w.order_.back()] == 0) {
        w.promoted_ = w.order_.back();
        w.effective_event_[w.promoted_] = 1;
    }

    // Efron's redistribute-to-the-right sweep: every point starts with 1/n;
    // sweeping upward, each censored point's accumulated mass is split
    // equally over all later points in canonical order. What remains on the
    // observed points is the product-limit mass.
    w.mass_.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const std::int32_t idx = w.order_[k];
        if (w.effective_event_[idx]) continue;
        const std::size_t later = n - 1 - k;  // nonzero: the last point is observed
        const double share = w.mass_[idx] / static_cast<double>(later);
        for (std::size_t j = k + 1; j < n; ++j) w.mass_[w.order_[j]] += share;
        w.mass_[idx] = 0.0;
    }

    // Suffix sums of observed mass in canonical order, for the conditional
    // normalizers.
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        const std::int32_t idx = w.order_[k];
        suffix[k] = suffix[k + 1] + (w.effective_event_[idx] ? w.mass_[idx] : 0.0);
    }

    // Pairwise masses: diagonal 1/n at observed points; a censored point i
    // sends (1/n) * mass_j / (observed mass right of i) to each observed j
    // after it.
    std::size_t atom_count = 0;
    for (std::size_t k = 0; k < n; ++k)
        atom_count += w.effective_event_[w.order_[k]] ? 1 : (n - 1 - k);
    w.atoms_.reserve(atom_count);
    const double unit = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::int32_t i = w.order_[k];
        if (w.effective_event_[i]) {
            w.atoms_.push(res.values[i], unit, i);
            continue;
        }
        const double tail = suffix[k + 1];
        for (std::size_t j = k + 1; j < n; ++j) {
            const std::int32_t donor = w.order_[j];
            if (!w.effective_event_[donor]) continue;
            w.atoms_.push(res.values[donor], unit * w.mass_[donor] / tail, i);
        }
    }

    // Marginal cdf atoms in canonical order (already value-sorted).
    w.cdf_value_.reserve(observed + (w.promoted_ >= 0 ? 1 : 0));
    w.cdf_cum_.reserve(w.cdf_value_.capacity());
    double running = 0.0;
    for (std::int32_t idx : w.order_) {
        if (!w.effective_event_[idx]) continue;
        running += w.mass_[idx];
        w.cdf_value_.push_back(res.values[idx]);
        w.cdf_cum_.push_back(running);
    }
    return w;
}

double RedistributionWeights::conditional_expectation(
    const std::function<double(double)>& g, std::size_t i) const {
    if (i >= n()) throw std::invalid_argument("observation index out of range");
    if (effective_event_[i]) return g(residual_[i]);
    // Censored: average g over the atoms this observation redistributes to,
    // normalized back to a conditional law.
    double num = 0.0, den = 0.0;
    const auto& a = atoms_;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a.row[k] != static_cast<std::int32_t>(i)) continue;
        num += g(a.value[k]) * a.weight[k];
        den += a.weight[k];
    }
    if (den <= 0.0)
        throw NumericalError("no probability mass beyond censored observation");
    return num / den;
}

double RedistributionWeights::expectation(
    const std::function<double(double, std::int32_t)>& g) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < atoms_.size(); ++k)
        acc += g(atoms_.value[k], atoms_.row[k]) * atoms_.weight[k];
    return acc;
}

double RedistributionWeights::cdf(double t) const {
    const auto it = std::upper_bound(cdf_value_.begin(), cdf_value_.end(), t);
    if (it == cdf_value_.begin()) return 0.0;
    return cdf_cum_[static_cast<std::size_t>(it - cdf_value_.begin()) - 1];
}

double RedistributionWeights::marginal_quantile(double frac) const {
    const double total = cdf_cum_.back();
    const double want = frac * total - 1e-15 * total;
    for (std::size_t k = 0; k < cdf_cum_.size(); ++k)
        if (cdf_cum_[k] >= want) return cdf_value_[k];
    return cdf_value_.back();
}

double weighted_expectation(
    const RedistributionWeights& w, const CensoredSample& sample,
    const std::function<double(double, std::span<const double>)>& g) {
    if (sample.n() != w.n())
        throw std::invalid_argument("sample/weights size mismatch");
    return w.expectation([&](double u, std::int32_t row) {
        return g(u, sample.row(static_cast<std::size_t>(row)));
    });
}

}  // namespace censreg
