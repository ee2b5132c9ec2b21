#include "censreg/inner_fit.hpp"

#include "censreg/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace censreg {

namespace {

// One weighted least squares sweep over the atom list. Returns false when the
// (ridged) normal equations are numerically singular.
bool wls_step(const AtomList& atoms, const CensoredSample& sample,
              std::span<const double> atom_weight, double ridge,
              std::vector<double>& out) {
    const std::size_t p = sample.p();
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                   static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double wk = atom_weight[k];
        if (wk == 0.0) continue;
        const auto x = sample.row(static_cast<std::size_t>(atoms.row[k]));
        const double r = atoms.value[k];
        for (std::size_t a = 0; a < p; ++a) {
            rhs(static_cast<Eigen::Index>(a)) += wk * x[a] * r;
            for (std::size_t b = a; b < p; ++b)
                normal(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                    wk * x[a] * x[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        normal(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += ridge;
        for (std::size_t b = 0; b < a; ++b)
            normal(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                normal(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd sol = ldlt.solve(rhs);
    if (!sol.allFinite()) return false;
    out.assign(sol.data(), sol.data() + p);
    return true;
}

double norm2(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace

double c_objective(const InnerProblem& prob, std::span<const double> coef) {
    if (!prob.weights || !prob.sample) throw std::invalid_argument("unset inner problem");
    if (!(prob.scale > 0.0)) throw std::invalid_argument("inner objective needs scale > 0");
    ShiftedAtoms scratch;
    scratch.build(*prob.weights, *prob.sample, coef);
    return weighted_loss_sum(prob.loss, scratch.values(), scratch.weights(), prob.scale);
}

InnerFitResult irwls_minimize(const InnerProblem& prob, const IRWLSConfig& cfg) {
    if (!prob.weights || !prob.sample) throw std::invalid_argument("unset inner problem");
    if (!(prob.scale > 0.0)) throw std::invalid_argument("IRWLS needs scale > 0");
    if (!prob.loss.differentiable())
        throw std::invalid_argument("IRWLS needs a differentiable loss");

    const CensoredSample& sample = *prob.sample;
    const AtomList& atoms = prob.weights->atoms();
    const std::size_t p = sample.p();

    InnerFitResult result;
    result.coef.assign(p, 0.0);

    ShiftedAtoms scratch;
    std::vector<double> atom_weight(atoms.size());
    std::vector<double> next(p);

    scratch.build(*prob.weights, sample, result.coef);
    double objective =
        weighted_loss_sum(prob.loss, scratch.values(), scratch.weights(), prob.scale);
    result.objective = objective;
    if (cfg.record_trace) result.objective_trace.push_back(objective);

    std::vector<double> best_coef = result.coef;
    double best_objective = objective;

    for (int it = 0; it < cfg.max_iter; ++it) {
        const auto values = scratch.values();
        const auto masses = scratch.weights();
        if (prob.loss.kind() == LossKind::bisquare) {
            kernels::bisquare_irwls_weights(values.data(), masses.data(), values.size(),
                                            1.0 / (prob.loss.tuning() * prob.scale),
                                            atom_weight.data());
        } else {
            for (std::size_t k = 0; k < values.size(); ++k)
                atom_weight[k] = masses[k] * prob.loss.weight(values[k] / prob.scale);
        }

        if (!wls_step(atoms, sample, atom_weight, cfg.ridge, next)) {
            result.converged = false;
            break;
        }

        double step = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double d = next[j] - result.coef[j];
            step += d * d;
        }
        step = std::sqrt(step);
        result.coef = next;
        ++result.iterations;

        scratch.build(*prob.weights, sample, result.coef);
        objective = weighted_loss_sum(prob.loss, scratch.values(), scratch.weights(),
                                      prob.scale);
        if (cfg.record_trace) result.objective_trace.push_back(objective);
        if (objective <= best_objective) {
            best_objective = objective;
            best_coef = result.coef;
        }

        if (step <= cfg.tol * (1.0 + norm2(result.coef))) break;
        if (it + 1 == cfg.max_iter) result.converged = false;
    }

    result.coef = best_coef;
    result.objective = best_objective;
    return result;
}

namespace {

InnerSelection select_by_criterion(
    const InnerProblem& prob, const std::vector<std::vector<double>>& candidates,
    const ScaleConfig& cfg, const LossFunction* rho2, bool refine, SearchStats* stats) {
    if (candidates.empty()) throw std::invalid_argument("empty inner candidate list");
    const CensoredSample& sample = *prob.sample;

    ShiftedAtoms scratch;
    InnerSelection best;
    bool have = false;
    for (std::size_t r = 0; r < candidates.size(); ++r) {
        scratch.build(*prob.weights, sample, candidates[r]);
        const ScaleResult s =
            rho2 ? solve_tau_scale(scratch.values(), scratch.weights(), cfg, *rho2,
                                   scratch.ref_magnitude(), stats)
                 : solve_m_scale(scratch.values(), scratch.weights(), cfg,
                                 scratch.ref_magnitude(), stats);
        if (!have || s.value < best.criterion) {
            best.coef = candidates[r];
            best.criterion = s.value;
            best.index = r;
            best.exact_fit = s.exact_fit;
            have = true;
        }
    }

    if (refine && !best.exact_fit && best.criterion > 0.0 &&
        cfg.loss.kind() == LossKind::bisquare) {
        // IRWLS sweeps at the winning scale. Each sweep computes weights at
        // the current iterate and solves for the full next iterate; a step is
        // kept only if the scale criterion does not increase.
        double irwls_scale = best.criterion;
        ShiftedAtoms shifted;
        std::vector<double> atom_weight(prob.weights->atoms().size());
        std::vector<double> next(sample.p());
        std::vector<double> current = best.coef;
        for (int step = 0; step < 20; ++step) {
            shifted.build(*prob.weights, sample, current);
            const auto values = shifted.values();
            const auto masses = shifted.weights();
            kernels::bisquare_irwls_weights(values.data(), masses.data(), values.size(),
                                            1.0 / (cfg.loss.tuning() * irwls_scale),
                                            atom_weight.data());
            if (!wls_step(prob.weights->atoms(), sample, atom_weight, 1e-12, next))
                break;
            scratch.build(*prob.weights, sample, next);
            const ScaleResult s =
                rho2 ? solve_tau_scale(scratch.values(), scratch.weights(), cfg, *rho2,
                                       scratch.ref_magnitude(), stats)
                     : solve_m_scale(scratch.values(), scratch.weights(), cfg,
                                     scratch.ref_magnitude(), stats);
            if (!(s.value <= best.criterion)) break;
            current = next;
            best.coef = current;
            best.criterion = s.value;
            best.exact_fit = s.exact_fit;
            if (s.value > 0) irwls_scale = s.value;
            if (s.exact_fit) break;
        }
    }
    return best;
}

}  // namespace

InnerSelection s_inner(const InnerProblem& prob,
                       const std::vector<std::vector<double>>& candidates,
                       const ScaleConfig& cfg, bool refine, SearchStats* stats) {
    return select_by_criterion(prob, candidates, cfg, nullptr,
                               refine && cfg.loss.differentiable(), stats);
}

InnerSelection tau_inner(const InnerProblem& prob,
                         const std::vector<std::vector<double>>& candidates,
                         const ScaleConfig& cfg, const LossFunction& rho2,
                         bool refine, SearchStats* stats) {
    if (!rho2.bounded())
        throw std::invalid_argument("tau selection needs a bounded second loss");
    return select_by_criterion(prob, candidates, cfg, &rho2,
                               refine && cfg.loss.differentiable(), stats);
}

InnerFitResult weighted_l1_minimize(const RedistributionWeights& weights,
                                    const CensoredSample& sample, double tol,
                                    int max_iter) {
    const AtomList& atoms = weights.atoms();
    const std::size_t p = sample.p();

    // Smoothing anchored at the marginal median absolute residual.
    std::vector<std::pair<double, double>> sorted;
    sorted.reserve(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k)
        sorted.emplace_back(std::abs(atoms.value[k]), atoms.weight[k]);
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (const auto& [value, weight] : sorted) total += weight;
    double med = 0.0, cum = 0.0;
    for (const auto& [value, weight] : sorted) {
        cum += weight;
        if (cum >= 0.5 * total - 1e-15 * total) {
            med = value;
            break;
        }
    }
    const double smoothing = std::max(1e-6 * med, 1e-300);

    InnerFitResult result;
    result.coef.assign(p, 0.0);

    ShiftedAtoms scratch;
    std::vector<double> atom_weight(atoms.size());
    std::vector<double> next(p);

    auto objective_at = [&](std::span<const double> coef) {
        scratch.build(weights, sample, coef);
        const auto values = scratch.values();
        const auto masses = scratch.weights();
        double acc = 0.0;
        for (std::size_t k = 0; k < values.size(); ++k)
            acc += masses[k] * std::abs(values[k]);
        return acc;
    };

    result.objective = objective_at(result.coef);
    std::vector<double> best_coef = result.coef;
    double best_objective = result.objective;

    for (int it = 0; it < max_iter; ++it) {
        scratch.build(weights, sample, result.coef);
        const auto values = scratch.values();
        const auto masses = scratch.weights();
        for (std::size_t k = 0; k < values.size(); ++k)
            atom_weight[k] = masses[k] / std::max(std::abs(values[k]), smoothing);
        if (!wls_step(atoms, sample, atom_weight, 1e-12, next)) {
            result.converged = false;
            break;
        }
        double step = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double d = next[j] - result.coef[j];
            step += d * d;
        }
        step = std::sqrt(step);
        result.coef = next;
        ++result.iterations;
        const double objective = objective_at(result.coef);
        if (objective <= best_objective) {
            best_objective = objective;
            best_coef = result.coef;
        }
        if (step <= tol * (1.0 + norm2(result.coef))) break;
        if (it + 1 == max_iter) result.converged = false;
    }
    result.coef = best_coef;
    result.objective = best_objective;
    return result;
}

}  // namespace censreg
