#include "censreg/scale.hpp"

#include "censreg/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace censreg {

namespace {

constexpr double kZeroRel = 1e-12;     // |v| <= kZeroRel * ref counts as zero
constexpr double kExactSlack = 1e-12;  // slack on the no-positive-root test

struct SortedAbs {
    // (|v|, w) sorted ascending by |v|
    std::vector<std::pair<double, double>> atoms;
    double total = 0.0;

    void build(std::span<const double> v, std::span<const double> w) {
        atoms.clear();
        atoms.reserve(v.size());
        total = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            atoms.emplace_back(std::abs(v[k]), w[k]);
            total += w[k];
        }
        std::sort(atoms.begin(), atoms.end());
    }

    // Smallest value t with cumulative mass >= frac * total (lower quantile).
    double quantile(double frac) const {
        const double want = frac * total;
        double cum = 0.0;
        for (const auto& [value, weight] : atoms) {
            cum += weight;
            if (cum >= want - 1e-15 * total) return value;
        }
        return atoms.empty() ? 0.0 : atoms.back().first;
    }
};

}  // namespace

double weighted_loss_sum(const LossFunction& loss, std::span<const double> v,
                         std::span<const double> w, double s) {
    if (loss.kind() == LossKind::bisquare) {
        const double unit = kernels::bisquare_weighted_sum(v.data(), w.data(), v.size(),
                                                           1.0 / (loss.tuning() * s));
        return loss.sup() * unit;
    }
    if (loss.kind() == LossKind::jump)
        return kernels::tail_mass(v.data(), w.data(), v.size(), s);
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) acc += w[k] * loss.rho(v[k] / s);
    return acc;
}

bool scale_is_exact_zero(const LossFunction& loss, double target,
                         std::span<const double> v, std::span<const double> w,
                         double ref_magnitude) {
    double ref = ref_magnitude;
    if (ref < 0.0) {
        ref = 0.0;
        for (double x : v) ref = std::max(ref, std::abs(x));
    }
    const double zero_tol = kZeroRel * ref;
    double total = 0.0, mass_zero = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        total += w[k];
        if (std::abs(v[k]) <= zero_tol) mass_zero += w[k];
    }
    return loss.sup() * (total - mass_zero) < target + kExactSlack;
}

ScaleResult solve_m_scale(std::span<const double> v, std::span<const double> w,
                          const ScaleConfig& cfg, double ref_magnitude,
                          SearchStats* stats) {
    if (v.size() != w.size()) throw std::invalid_argument("value/weight size mismatch");
    if (v.empty()) throw std::invalid_argument("empty atom list");
    if (!cfg.loss.bounded()) throw std::invalid_argument("M-scale requires a bounded loss");
    const double sup = cfg.loss.sup();
    if (!(cfg.target > 0.0 && cfg.target < sup))
        throw std::invalid_argument("scale target must lie in (0, sup rho)");
    if (stats) ++stats->scale_solves;

    double ref = ref_magnitude;
    double total = 0.0;
    double vmax = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) throw NumericalError("non-finite shifted residual");
        total += w[k];
        vmax = std::max(vmax, std::abs(v[k]));
    }
    if (ref < 0.0) ref = vmax;
    const double zero_tol = kZeroRel * ref;

    double mass_zero = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        if (std::abs(v[k]) <= zero_tol) mass_zero += w[k];

    // No positive root when the mass away from zero cannot reach the target.
    if (sup * (total - mass_zero) < cfg.target + kExactSlack ||
        mass_zero > total - cfg.target / sup + kExactSlack)
        return {0.0, true, true};

    SortedAbs sorted;
    sorted.build(v, w);

    if (cfg.loss.kind() == LossKind::jump) {
        // Closed form: the lower weighted (1 - target)-quantile of |v|.
        const double s = sorted.quantile(1.0 - cfg.target / total);
        if (stats) ++stats->kernel_evals;
        if (s <= zero_tol) return {0.0, true, true};
        return {s, false, true};
    }

    double lo = sorted.quantile(0.10) / 10.0;
    double hi = sorted.quantile(0.999) * 10.0;
    if (hi <= zero_tol) return {0.0, true, true};
    lo = std::max(lo, zero_tol);
    if (lo >= hi) lo = hi / 16.0;

    auto h = [&](double s) {
        if (stats) ++stats->kernel_evals;
        return weighted_loss_sum(cfg.loss, v, w, s);
    };

    // h is nonincreasing in s. Expand the bracket geometrically until it
    // straddles the target.
    bool bracketed_lo = false, bracketed_hi = false;
    for (int k = 0; k < 200; ++k) {
        if (h(lo) > cfg.target) {
            bracketed_lo = true;
            break;
        }
        lo /= 8.0;
        if (lo < 1e-30 * ref) return {0.0, true, true};
    }
    for (int k = 0; k < 200; ++k) {
        if (h(hi) < cfg.target) {
            bracketed_hi = true;
            break;
        }
        hi *= 8.0;
        if (!std::isfinite(hi)) break;
    }
    if (!bracketed_lo || !bracketed_hi) return {hi, false, false};

    for (int it = 0; it < cfg.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h(mid) > cfg.target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= cfg.tol * hi) break;
    }
    return {0.5 * (lo + hi), false, true};
}

ScaleResult solve_tau_scale(std::span<const double> v, std::span<const double> w,
                            const ScaleConfig& cfg, const LossFunction& rho2,
                            double ref_magnitude, SearchStats* stats) {
    const ScaleResult s = solve_m_scale(v, w, cfg, ref_magnitude, stats);
    if (s.exact_fit || s.value == 0.0) return {0.0, s.exact_fit, s.converged};
    if (stats) ++stats->kernel_evals;
    const double second = weighted_loss_sum(rho2, v, w, s.value);
    return {s.value * std::sqrt(std::max(second, 0.0)), false, s.converged};
}

void ShiftedAtoms::build(const RedistributionWeights& weights,
                         const CensoredSample& sample, std::span<const double> gamma) {
    const AtomList& atoms = weights.atoms();
    if (gamma.size() != sample.p())
        throw std::invalid_argument("inner coefficient vector has wrong dimension");
    weights_ = &atoms.weight;

    const std::size_t n = sample.n();
    shifts_.resize(n);
    double shift_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = sample.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) dot += gamma[j] * x[j];
        shifts_[i] = dot;
        shift_max = std::max(shift_max, std::abs(dot));
    }

    values_.resize(atoms.size());
    double value_max = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        values_[k] = atoms.value[k] - shifts_[static_cast<std::size_t>(atoms.row[k])];
        value_max = std::max(value_max, std::abs(atoms.value[k]));
    }
    // Magnitude of the data before cancellation; the solver's numeric zero is
    // relative to this so exact fits are detected through rounding noise.
    ref_ = std::max(value_max, shift_max);
}

ScaleResult m_scale(const RedistributionWeights& weights, const CensoredSample& sample,
                    std::span<const double> gamma, const ScaleConfig& cfg,
                    SearchStats* stats) {
    ShiftedAtoms scratch;
    scratch.build(weights, sample, gamma);
    return solve_m_scale(scratch.values(), scratch.weights(), cfg,
                         scratch.ref_magnitude(), stats);
}

ScaleResult tau_scale(const RedistributionWeights& weights, const CensoredSample& sample,
                      std::span<const double> gamma, const ScaleConfig& cfg,
                      const LossFunction& rho2, SearchStats* stats) {
    if (!rho2.bounded())
        throw std::invalid_argument("tau scale needs a bounded second loss");
    ShiftedAtoms scratch;
    scratch.build(weights, sample, gamma);
    return solve_tau_scale(scratch.values(), scratch.weights(), cfg, rho2,
                           scratch.ref_magnitude(), stats);
}

bool normalized_loss_dominated(const LossFunction& smaller, const LossFunction& larger,
                               double tol) {
    if (!smaller.bounded() || !larger.bounded()) return false;
    double hi = 3.0;
    if (smaller.kind() == LossKind::bisquare) hi = std::max(hi, smaller.tuning());
    if (larger.kind() == LossKind::bisquare) hi = std::max(hi, larger.tuning());
    hi *= 1.5;
    for (int k = 0; k <= 400; ++k) {
        const double u = hi * k / 400.0;
        if (smaller.normalized(u) > larger.normalized(u) + tol) return false;
    }
    return true;
}

}  // namespace censreg
