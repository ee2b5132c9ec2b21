#include "censreg/estimators.hpp"

#include "censreg/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace censreg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double quad_form(std::span<const double> diag, std::span<const double> v) {
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) acc += diag[k] * v[k] * v[k];
    return acc;
}

double lower_median(std::vector<double> values) {
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(),
                     values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    return values[mid];
}

std::vector<double> solve_ls(const CensoredSample& sample,
                             const std::vector<double>& response) {
    const auto n = static_cast<Eigen::Index>(sample.n());
    const auto p = static_cast<Eigen::Index>(sample.p());
    Eigen::MatrixXd design(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = response[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < p; ++j)
            design(i, j) = sample.covariate(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(j));
    }
    const Eigen::VectorXd sol = design.colPivHouseholderQr().solve(y);
    return {sol.data(), sol.data() + p};
}

}  // namespace

std::vector<double> metric_diagonal(const CensoredSample& sample, MetricKind kind) {
    std::vector<double> diag(sample.p(), 1.0);
    if (kind == MetricKind::identity) return diag;
    for (std::size_t j = 0; j < sample.p(); ++j) {
        if (sample.has_intercept() && j == 0) continue;
        std::vector<double> col(sample.n());
        for (std::size_t i = 0; i < sample.n(); ++i) col[i] = sample.covariate(i, j);
        const double med = lower_median(col);
        for (double& v : col) v = std::abs(v - med);
        const double mad = lower_median(col);
        diag[j] = mad > 0.0 ? mad * mad : 1.0;
    }
    return diag;
}

CandidateSet generate_candidates(const CensoredSample& sample, const SearchConfig& cfg) {
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();
    if (cfg.n_candidates == 0) throw std::invalid_argument("need at least one candidate");
    const SampleDiagnostics diag = validate(sample);
    if (!diag.full_rank) throw DataError("design matrix is rank deficient");

    StreamRng rng(cfg.seed, cfg.rng_stream_id, RngPurpose::candidates);
    CandidateSet set;
    set.betas.reserve(cfg.n_candidates);
    set.subsamples.reserve(cfg.n_candidates);

    Eigen::MatrixXd sub(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(p));
    std::vector<std::size_t> idx(p);

    const std::uint64_t budget = 100ULL * cfg.n_candidates;
    std::uint64_t attempts = 0;
    std::uint64_t rejects = 0;
    // More singular rejects than n - p signals a largely degenerate design;
    // stop instead of silently undersampling it.
    const std::uint64_t reject_cap = n > p ? static_cast<std::uint64_t>(n - p) : 1;

    while (set.betas.size() < cfg.n_candidates) {
        if (++attempts > budget)
            throw DataError("could not draw enough nonsingular subsamples");
        // p distinct row indices, uniform. Canonical (sorted) order so a
        // subsample drawn twice yields bitwise-identical coefficients.
        for (std::size_t a = 0; a < p;) {
            const std::size_t candidate = rng.uniform_below(n);
            bool dup = false;
            for (std::size_t b = 0; b < a; ++b) dup |= idx[b] == candidate;
            if (!dup) idx[a++] = candidate;
        }
        std::sort(idx.begin(), idx.end());
        for (std::size_t a = 0; a < p; ++a) {
            rhs(static_cast<Eigen::Index>(a)) = sample.response(idx[a]);
            for (std::size_t b = 0; b < p; ++b)
                sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    sample.covariate(idx[a], b);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) {
            if (++rejects > reject_cap && rejects > 8)
                throw DataError(
                    "too many singular subsamples; design appears degenerate");
            continue;
        }
        const Eigen::VectorXd beta = lu.solve(rhs);
        set.betas.emplace_back(beta.data(), beta.data() + p);
        std::vector<std::size_t> prov(idx.begin(), idx.end());
        std::sort(prov.begin(), prov.end());
        set.subsamples.push_back(std::move(prov));
    }
    return set;
}

namespace {

// Outcome of the outer candidate scan shared by the scale-minimizing
// estimators.
struct SearchOutcome {
    bool found = false;
    std::size_t winner = 0;
    std::vector<double> inner_coef;
    double criterion = 0.0;  // scale (or tau-scale) at the winner
    double objective = std::numeric_limits<double>::infinity();
    bool exact_fit = false;
    std::size_t evaluated = 0;
    SearchStats stats;
};

// How a candidate's criterion compares against the current small-set minimum.
enum class Cmp { less, tie, greater };

// The kappa-pruned outer search. For every outer candidate the inner
// coefficient candidates are the differences beta_r - beta_j; the candidate's
// objective is the metric norm of the best inner direction, and the running
// minimum kappa lets later candidates skip directions that cannot win.
//
// Selection is lexicographic in (norm objective, scale, candidate index).
// Exact objective ties are common: the zero direction (r == j) makes every
// direction-set local minimum score exactly zero, and clustered contamination
// produces duplicate candidates with the same property. Comparing the winning
// scale on ties keeps the selection pinned to the best-fitting cluster.
//
// Correctness contract (tested): with identical inputs the pruned and
// unpruned scans select the same candidate, inner coefficients and scale.
SearchOutcome run_outer_search(const CensoredSample& sample, const CandidateSet& cands,
                               std::span<const double> metric, const ScaleConfig& scale_cfg,
                               const LossFunction* rho2, bool prune) {
    const std::size_t count = cands.size();
    const std::size_t p = sample.p();

    SearchOutcome out;
    double kappa = std::numeric_limits<double>::infinity();

    std::vector<double> direction(p);
    std::vector<double> norms(count);
    std::vector<std::size_t> small_set, large_set;
    ShiftedAtoms scratch;

    const bool jump_loss = scale_cfg.loss.kind() == LossKind::jump;

    for (std::size_t j = 0; j < count; ++j) {
        const ResidualVector res = residuals(sample, cands.betas[j]);
        const RedistributionWeights weights = kaplan_meier(res);

        // Directions with norm strictly above kappa cannot win even on a
        // scale tie, so the tie region stays in the small set.
        small_set.clear();
        large_set.clear();
        for (std::size_t r = 0; r < count; ++r) {
            for (std::size_t a = 0; a < p; ++a)
                direction[a] = cands.betas[r][a] - cands.betas[j][a];
            norms[r] = quad_form(metric, direction);
            if (!prune || !out.found || norms[r] <= kappa)
                small_set.push_back(r);
            else
                large_set.push_back(r);
        }
        if (small_set.empty()) {
            ++out.stats.pruned_candidates;
            continue;
        }

        auto build = [&](std::size_t r) {
            for (std::size_t a = 0; a < p; ++a)
                direction[a] = cands.betas[r][a] - cands.betas[j][a];
            scratch.build(weights, sample, direction);
        };

        // Full criterion over the small-norm directions.
        double omega = std::numeric_limits<double>::infinity();
        std::size_t winner_r = small_set.front();
        bool winner_exact = false;
        for (std::size_t r : small_set) {
            build(r);
            const ScaleResult s =
                rho2 ? solve_tau_scale(scratch.values(), scratch.weights(), scale_cfg,
                                       *rho2, scratch.ref_magnitude(), &out.stats)
                     : solve_m_scale(scratch.values(), scratch.weights(), scale_cfg,
                                     scratch.ref_magnitude(), &out.stats);
            if (s.value < omega) {
                omega = s.value;
                winner_r = r;
                winner_exact = s.exact_fit;
            }
        }

        // Scan the large-norm directions. A winner there cannot beat kappa,
        // so the candidate is dropped as soon as one matches or beats omega
        // with a lower index. Decisions come from threshold tests where a
        // cheap one exists: one kernel evaluation at omega for the bisquare,
        // two tail-mass passes for the jump loss.
        bool dropped = false;
        for (std::size_t r : large_set) {
            Cmp cmp;
            build(r);
            if (rho2 || omega == 0.0) {
                const ScaleResult s =
                    rho2 ? solve_tau_scale(scratch.values(), scratch.weights(), scale_cfg,
                                           *rho2, scratch.ref_magnitude(), &out.stats)
                         : solve_m_scale(scratch.values(), scratch.weights(), scale_cfg,
                                         scratch.ref_magnitude(), &out.stats);
                cmp = s.value < omega ? Cmp::less
                                      : (s.value == omega ? Cmp::tie : Cmp::greater);
            } else if (jump_loss) {
                out.stats.kernel_evals += 2;
                const auto v = scratch.values();
                const auto w = scratch.weights();
                const double mass_ge =
                    weighted_loss_sum(scale_cfg.loss, v, w, omega);
                if (mass_ge <= scale_cfg.target) {
                    cmp = Cmp::less;
                } else {
                    const double mass_gt = weighted_loss_sum(
                        scale_cfg.loss, v, w,
                        std::nextafter(omega, std::numeric_limits<double>::infinity()));
                    cmp = mass_gt <= scale_cfg.target ? Cmp::tie : Cmp::greater;
                }
            } else {
                ++out.stats.kernel_evals;
                const double at_omega = weighted_loss_sum(
                    scale_cfg.loss, scratch.values(), scratch.weights(), omega);
                cmp = at_omega < scale_cfg.target
                          ? Cmp::less
                          : (at_omega == scale_cfg.target ? Cmp::tie : Cmp::greater);
            }
            if (cmp == Cmp::less || (cmp == Cmp::tie && r < winner_r)) {
                dropped = true;
                break;
            }
        }
        if (dropped) {
            ++out.stats.pruned_candidates;
            continue;
        }

        ++out.evaluated;
        const double objective = norms[winner_r];
        if (!out.found || objective < out.objective ||
            (objective == out.objective && omega < out.criterion)) {
            out.found = true;
            out.winner = j;
            out.objective = objective;
            out.criterion = omega;
            out.exact_fit = winner_exact;
            out.inner_coef.resize(p);
            for (std::size_t a = 0; a < p; ++a)
                out.inner_coef[a] = cands.betas[winner_r][a] - cands.betas[j][a];
            kappa = objective;
        }
    }
    return out;
}

// Post-search polish (opt-in): IRWLS-refine the winning inner coefficients,
// then iterate beta <- beta + gamma while the inner norm keeps decreasing.
void polish_winner(const CensoredSample& sample, const CandidateSet& cands,
                   std::span<const double> metric, const ScaleConfig& scale_cfg,
                   const LossFunction* rho2, FitResult& fit,
                   std::vector<double>& inner_coef, SearchStats* stats) {
    auto inner_at = [&](const std::vector<double>& beta) {
        const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));
        InnerProblem prob{&weights, &sample, 1.0, scale_cfg.loss};
        std::vector<std::vector<double>> directions;
        directions.reserve(cands.size());
        std::vector<double> d(sample.p());
        for (std::size_t r = 0; r < cands.size(); ++r) {
            for (std::size_t a = 0; a < sample.p(); ++a)
                d[a] = cands.betas[r][a] - beta[a];
            directions.push_back(d);
        }
        return rho2 ? tau_inner(prob, directions, scale_cfg, *rho2, true, stats)
                    : s_inner(prob, directions, scale_cfg, true, stats);
    };

    InnerSelection current = inner_at(fit.beta);
    inner_coef = current.coef;
    fit.scale = current.criterion;
    fit.objective = quad_form(metric, current.coef);
    fit.exact_fit = current.exact_fit;

    for (int step = 0; step < 10; ++step) {
        if (fit.exact_fit) break;
        std::vector<double> beta_next(fit.beta);
        for (std::size_t a = 0; a < beta_next.size(); ++a)
            beta_next[a] += inner_coef[a];
        const InnerSelection trial = inner_at(beta_next);
        const double objective = quad_form(metric, trial.coef);
        if (!(objective < fit.objective)) break;
        fit.beta = beta_next;
        inner_coef = trial.coef;
        fit.scale = trial.criterion;
        fit.objective = objective;
        fit.exact_fit = trial.exact_fit;
    }
}

FitResult scale_search_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                                const ScaleConfig& scale_cfg, const LossFunction* rho2) {
    ensure_fittable(sample);
    const CandidateSet cands = generate_candidates(sample, cfg);
    const std::vector<double> metric = metric_diagonal(sample, cfg.metric);
    SearchOutcome out =
        run_outer_search(sample, cands, metric, scale_cfg, rho2, cfg.prune);
    if (!out.found) throw NumericalError("candidate search found no solution");

    FitResult fit;
    fit.beta = cands.betas[out.winner];
    fit.scale = out.criterion;
    fit.objective = out.objective;
    fit.exact_fit = out.exact_fit;
    fit.n_candidates_evaluated = out.evaluated;
    fit.converged = true;
    fit.stats = out.stats;

    if (cfg.refine && !fit.exact_fit) {
        std::vector<double> inner_coef = out.inner_coef;
        polish_winner(sample, cands, metric, scale_cfg, rho2, fit, inner_coef,
                      &fit.stats);
    }
    return fit;
}

ScaleConfig make_scale_config(const SearchConfig& cfg, const LossFunction& rho1,
                              double b) {
    ScaleConfig scale_cfg;
    scale_cfg.loss = rho1;
    scale_cfg.target = b;
    scale_cfg.tol = cfg.scale_tol;
    scale_cfg.max_iter = cfg.scale_max_iter;
    return scale_cfg;
}

}  // namespace

FitResult s_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                     const LossFunction& rho1, double b) {
    if (!rho1.bounded()) throw std::invalid_argument("S estimation needs a bounded loss");
    return scale_search_estimate(sample, cfg, make_scale_config(cfg, rho1, b), nullptr);
}

FitResult s_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    const LossFunction rho1 = LossFunction::bisquare(cfg.c1);
    return s_estimate(sample, cfg, rho1, calibrate_b(rho1, cfg.b_over_a));
}

FitResult lms_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    return s_estimate(sample, cfg, LossFunction::jump(), 0.5);
}

FitResult tau_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                       const LossFunction& rho1, const LossFunction& rho2, double b) {
    if (!rho1.bounded() || !rho2.bounded())
        throw std::invalid_argument("tau estimation needs bounded losses");
    // Consistency requires the second loss to satisfy 2*rho(u) >= psi(u)*u.
    if (rho2.differentiable()) {
        const double hi = rho2.kind() == LossKind::bisquare ? 1.5 * rho2.tuning() : 10.0;
        for (int k = 0; k <= 200; ++k) {
            const double u = hi * k / 200.0;
            if (2.0 * rho2.rho(u) - rho2.psi(u) * u < -1e-12)
                throw std::invalid_argument("second loss fails the tau-scale condition");
        }
    }
    return scale_search_estimate(sample, cfg, make_scale_config(cfg, rho1, b), &rho2);
}

FitResult tau_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    const LossFunction rho1 = LossFunction::bisquare(cfg.c1);
    return tau_estimate(sample, cfg, rho1, LossFunction::bisquare(cfg.c2),
                        calibrate_b(rho1, cfg.b_over_a));
}

FitResult mm_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                      const LossFunction& rho1, const LossFunction& rho2, double b) {
    if (!normalized_loss_dominated(rho2, rho1))
        throw std::invalid_argument(
            "refinement loss must be dominated by the initial loss in normalized units");

    FitResult initial = s_estimate(sample, cfg, rho1, b);
    if (initial.exact_fit || initial.scale == 0.0) return initial;

    const RedistributionWeights weights = kaplan_meier(residuals(sample, initial.beta));
    InnerProblem prob{&weights, &sample, initial.scale, rho2};
    IRWLSConfig icfg;
    icfg.tol = cfg.irwls_tol;
    icfg.max_iter = cfg.irwls_max_iter;
    const InnerFitResult correction = irwls_minimize(prob, icfg);

    FitResult fit = initial;
    for (std::size_t a = 0; a < fit.beta.size(); ++a)
        fit.beta[a] += correction.coef[a];
    fit.objective = correction.objective;
    fit.converged = correction.converged;
    fit.stats.inner_evaluations += static_cast<std::uint64_t>(correction.iterations);
    return fit;
}

FitResult mm_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    const LossFunction rho1 = LossFunction::bisquare(cfg.c1);
    return mm_estimate(sample, cfg, rho1, LossFunction::bisquare(cfg.c2),
                       calibrate_b(rho1, cfg.b_over_a));
}

FitResult m_estimate(const CensoredSample& sample, const SearchConfig& cfg,
                     const LossFunction& rho, double fixed_scale) {
    if (!(fixed_scale > 0.0))
        throw std::invalid_argument("fixed-scale M estimation needs scale > 0");
    if (!rho.differentiable())
        throw std::invalid_argument("M estimation needs a differentiable loss");
    ensure_fittable(sample);

    const CandidateSet cands = generate_candidates(sample, cfg);
    const std::vector<double> metric = metric_diagonal(sample, cfg.metric);

    IRWLSConfig icfg;
    icfg.tol = cfg.irwls_tol;
    icfg.max_iter = cfg.irwls_max_iter;

    FitResult fit;
    fit.scale = fixed_scale;
    bool winner_converged = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cands.size(); ++j) {
        const RedistributionWeights weights =
            kaplan_meier(residuals(sample, cands.betas[j]));
        InnerProblem prob{&weights, &sample, fixed_scale, rho};
        const InnerFitResult inner = irwls_minimize(prob, icfg);
        ++fit.stats.inner_evaluations;
        const double objective = quad_form(metric, inner.coef);
        if (objective < best) {
            best = objective;
            fit.beta = cands.betas[j];
            winner_converged = inner.converged;
        }
    }
    fit.objective = best;
    fit.converged = winner_converged;
    fit.n_candidates_evaluated = cands.size();
    return fit;
}

FitResult buckley_james_ls(const CensoredSample& sample, const SearchConfig&) {
    ensure_fittable(sample);
    const std::size_t n = sample.n();

    FitResult fit;
    std::vector<double> beta = solve_ls(sample, sample.responses());
    std::vector<double> previous = beta;
    std::vector<double> imputed(n);
    const double start_norm =
        std::sqrt(dot({beta.data(), beta.size()}, {beta.data(), beta.size()}));

    fit.converged = false;
    for (int it = 0; it < 100; ++it) {
        const ResidualVector res = residuals(sample, beta);
        const RedistributionWeights weights = kaplan_meier(res);
        for (std::size_t i = 0; i < n; ++i) {
            if (sample.event(i)) {
                imputed[i] = sample.response(i);
            } else {
                const double cond = weights.conditional_expectation(
                    [](double u) { return u; }, i);
                imputed[i] = (sample.response(i) - res.values[i]) + cond;
            }
        }
        std::vector<double> next = solve_ls(sample, imputed);

        double step = 0.0, cycle = 0.0, norm = 0.0;
        for (std::size_t a = 0; a < next.size(); ++a) {
            step += (next[a] - beta[a]) * (next[a] - beta[a]);
            cycle += (next[a] - previous[a]) * (next[a] - previous[a]);
            norm += next[a] * next[a];
        }
        step = std::sqrt(step);
        cycle = std::sqrt(cycle);
        norm = std::sqrt(norm);

        if (norm > 1e8 * (1.0 + start_norm)) {
            beta = next;
            fit.converged = false;
            break;
        }
        if (it > 0 && cycle <= 1e-10 * (1.0 + norm)) {
            // Two-cycle: settle on the midpoint of the oscillation.
            for (std::size_t a = 0; a < next.size(); ++a)
                next[a] = 0.5 * (next[a] + beta[a]);
            beta = next;
            fit.converged = true;
            break;
        }
        previous = beta;
        beta = next;
        if (step <= 1e-12 * (1.0 + norm)) {
            fit.converged = true;
            break;
        }
    }

    fit.beta = beta;
    const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));
    const double second_moment =
        weights.expectation([](double u, std::int32_t) { return u * u; });
    fit.objective = std::max(second_moment, 0.0);
    fit.scale = std::sqrt(fit.objective);
    // Numeric zero relative to the response magnitude.
    double ymax = 0.0;
    for (std::size_t i = 0; i < n; ++i) ymax = std::max(ymax, std::abs(sample.response(i)));
    if (fit.scale <= 1e-12 * std::max(ymax, 1e-300)) {
        fit.scale = 0.0;
        fit.objective = 0.0;
        fit.exact_fit = true;
    }
    fit.n_candidates_evaluated = 0;
    return fit;
}

FitResult l1_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    ensure_fittable(sample);
    const std::vector<double> metric = metric_diagonal(sample, cfg.metric);

    // Fixed point of beta <- beta + gamma(beta), where gamma(beta) is the
    // convex weighted-L1 fit of the redistributed residuals. The sign score
    // is monotone, so no candidate search is needed; the iteration starts at
    // the imputed least squares fit.
    FitResult fit;
    std::vector<double> beta = buckley_james_ls(sample, cfg).beta;
    std::vector<double> previous = beta;
    const double start_norm =
        std::sqrt(dot({beta.data(), beta.size()}, {beta.data(), beta.size()}));

    fit.converged = false;
    double correction_norm = 0.0;
    for (int it = 0; it < 100; ++it) {
        const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));
        const InnerFitResult inner =
            weighted_l1_minimize(weights, sample, cfg.irwls_tol, 200);
        ++fit.stats.inner_evaluations;

        std::vector<double> next(beta);
        for (std::size_t a = 0; a < next.size(); ++a) next[a] += inner.coef[a];

        double cycle = 0.0, norm = 0.0;
        for (std::size_t a = 0; a < next.size(); ++a) {
            cycle += (next[a] - previous[a]) * (next[a] - previous[a]);
            norm += next[a] * next[a];
        }
        cycle = std::sqrt(cycle);
        norm = std::sqrt(norm);
        correction_norm = quad_form(metric, inner.coef);

        if (norm > 1e8 * (1.0 + start_norm)) {
            beta = next;
            break;
        }
        if (it > 0 && cycle <= 1e-10 * (1.0 + norm)) {
            for (std::size_t a = 0; a < next.size(); ++a)
                next[a] = 0.5 * (next[a] + beta[a]);
            beta = next;
            fit.converged = true;
            break;
        }
        previous = beta;
        beta = next;
        if (std::sqrt(correction_norm) <= 1e-10 * (1.0 + norm)) {
            fit.converged = true;
            break;
        }
    }

    fit.beta = beta;
    fit.objective = correction_norm;

    // Robust residual scale at the fit: median absolute residual of the
    // marginal distribution.
    const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));
    ScaleConfig med_cfg;
    med_cfg.loss = LossFunction::jump();
    med_cfg.target = 0.5;
    ShiftedAtoms scratch;
    std::vector<double> zero(sample.p(), 0.0);
    scratch.build(weights, sample, zero);
    const ScaleResult med = solve_m_scale(scratch.values(), scratch.weights(), med_cfg,
                                          scratch.ref_magnitude(), nullptr);
    fit.scale = med.value;
    fit.exact_fit = med.exact_fit;
    return fit;
}

FitResult gm_estimate(const CensoredSample& sample, const SearchConfig& cfg) {
    if (sample.p() != 2 || !sample.has_intercept())
        throw std::invalid_argument(
            "sign-score GM estimation supports simple regression with intercept only");
    ensure_fittable(sample);

    const std::size_t n = sample.n();
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = sample.covariate(i, 1);
    const double x_median = lower_median(xs);

    auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };

    auto score = [&](double slope) {
        const std::vector<double> beta{0.0, slope};
        const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));
        const double center = weights.marginal_quantile(0.5);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double factor = sign(sample.covariate(i, 1) - x_median);
            if (factor == 0.0) continue;
            acc += factor * weights.conditional_expectation(
                                [&](double u) { return sign(u - center); }, i);
        }
        return acc;
    };

    // Bracket the root with the subsample candidate slopes.
    const CandidateSet cands = generate_candidates(sample, cfg);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& beta : cands.betas) {
        lo = std::min(lo, beta[1]);
        hi = std::max(hi, beta[1]);
    }
    const double pad = 0.5 * (hi - lo) + 1e-9 * (std::abs(lo) + std::abs(hi) + 1e-300);
    lo -= pad;
    hi += pad;

    const int grid_points = 65;
    std::vector<double> grid(grid_points), values(grid_points);
    for (int k = 0; k < grid_points; ++k) {
        grid[k] = lo + (hi - lo) * k / (grid_points - 1);
        values[k] = score(grid[k]);
    }

    int bracket = -1;
    for (int k = 0; k + 1 < grid_points; ++k) {
        if (values[k] == 0.0 || values[k] * values[k + 1] < 0.0) {
            bracket = k;
            break;
        }
    }

    FitResult fit;
    double slope;
    if (bracket < 0) {
        // No sign change: fall back to the grid point with the smallest
        // absolute score and flag the result.
        int best = 0;
        for (int k = 1; k < grid_points; ++k)
            if (std::abs(values[k]) < std::abs(values[best])) best = k;
        slope = grid[best];
        fit.converged = false;
    } else if (values[bracket] == 0.0) {
        slope = grid[bracket];
        fit.converged = true;
    } else {
        double a = grid[bracket], b = grid[bracket + 1];
        double fa = values[bracket];
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            const double fm = score(mid);
            if (fm == 0.0) {
                a = b = mid;
                break;
            }
            if ((fa < 0.0) == (fm < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        slope = 0.5 * (a + b);
        fit.converged = true;
    }

    const std::vector<double> partial{0.0, slope};
    const RedistributionWeights weights = kaplan_meier(residuals(sample, partial));
    const double intercept = weights.marginal_quantile(0.5);
    fit.beta = {intercept, slope};
    fit.objective = std::abs(score(slope));
    fit.n_candidates_evaluated = cands.size();

    // Residual scale: median absolute deviation from the fitted center under
    // the marginal distribution.
    ScaleConfig med_cfg;
    med_cfg.loss = LossFunction::jump();
    med_cfg.target = 0.5;
    ShiftedAtoms scratch;
    const std::vector<double> center_shift{intercept, 0.0};
    scratch.build(weights, sample, center_shift);
    const ScaleResult med = solve_m_scale(scratch.values(), scratch.weights(), med_cfg,
                                          scratch.ref_magnitude(), nullptr);
    fit.scale = med.value;
    fit.exact_fit = med.exact_fit;
    return fit;
}

const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::ls: return "ls";
        case EstimatorKind::l1: return "l1";
        case EstimatorKind::lms: return "lms";
        case EstimatorKind::s: return "s";
        case EstimatorKind::mm: return "mm";
        case EstimatorKind::tau: return "tau";
        case EstimatorKind::m: return "m";
        case EstimatorKind::gm: return "gm";
    }
    return "?";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "ls") return EstimatorKind::ls;
    if (name == "l1") return EstimatorKind::l1;
    if (name == "lms") return EstimatorKind::lms;
    if (name == "s") return EstimatorKind::s;
    if (name == "mm") return EstimatorKind::mm;
    if (name == "tau") return EstimatorKind::tau;
    if (name == "m") return EstimatorKind::m;
    if (name == "gm") return EstimatorKind::gm;
    throw std::invalid_argument("unknown estimator: " + name);
}

FitResult fit(const CensoredSample& sample, EstimatorKind kind, const SearchConfig& cfg) {
    switch (kind) {
        case EstimatorKind::ls: return buckley_james_ls(sample, cfg);
        case EstimatorKind::l1: return l1_estimate(sample, cfg);
        case EstimatorKind::lms: return lms_estimate(sample, cfg);
        case EstimatorKind::s: return s_estimate(sample, cfg);
        case EstimatorKind::mm: return mm_estimate(sample, cfg);
        case EstimatorKind::tau: return tau_estimate(sample, cfg);
        case EstimatorKind::m: {
            const FitResult initial = s_estimate(sample, cfg);
            if (initial.exact_fit || initial.scale == 0.0) return initial;
            return m_estimate(sample, cfg, LossFunction::bisquare(cfg.c2), initial.scale);
        }
        case EstimatorKind::gm: return gm_estimate(sample, cfg);
    }
    throw std::invalid_argument("unknown estimator kind");
}

}  // namespace censreg
