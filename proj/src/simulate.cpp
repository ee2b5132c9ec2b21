#include "censreg/simulate.hpp"

#include "censreg/km.hpp"
#include "censreg/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace censreg {

CensoredSample generate_replicate(const SimulationScenario& scn,
                                  std::size_t replicate_index) {
    const std::size_t p = scn.beta0.size();
    if (p < 1) throw std::invalid_argument("scenario needs at least one coefficient");
    StreamRng rng(scn.seed, replicate_index, RngPurpose::replicate_data);

    std::vector<double> y(scn.n);
    std::vector<double> design(scn.n * p);
    std::vector<std::uint8_t> events(scn.n);
    for (std::size_t i = 0; i < scn.n; ++i) {
        double mean = scn.beta0[0];
        design[i * p] = 1.0;
        for (std::size_t j = 1; j < p; ++j) {
            const double z = rng.normal();
            design[i * p + j] = z;
            mean += scn.beta0[j] * z;
        }
        const double error = rng.normal();
        const double censor = rng.normal(scn.censor_mean, scn.censor_sd);
        const double response = mean + error;
        y[i] = std::min(response, censor);
        events[i] = response <= censor ? 1 : 0;
    }

    if (scn.contamination) {
        const Contamination& contam = *scn.contamination;
        if (contam.count > scn.n)
            throw std::invalid_argument("contamination count exceeds sample size");
        for (std::size_t i = 0; i < contam.count; ++i) {
            design[i * p] = 1.0;
            for (std::size_t j = 1; j < p; ++j) design[i * p + j] = contam.x0;
            y[i] = contam.slope * contam.x0;
            events[i] = 1;
        }
    }
    return CensoredSample(std::move(y), std::move(design), std::move(events), p, true);
}

std::vector<double> contamination_slope_grid() {
    return {2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
}

SimulationResult run_table(const SimulationScenario& scn,
                           const std::vector<EstimatorKind>& estimators,
                           const SearchConfig& base_cfg, int threads) {
    if (estimators.empty()) throw std::invalid_argument("empty estimator set");
    if (scn.replicates == 0) throw std::invalid_argument("need at least one replicate");
    if (scn.beta0.size() < 2)
        throw std::invalid_argument("slope MSE needs at least two coefficients");

    const auto start = std::chrono::steady_clock::now();
    const std::size_t reps = scn.replicates;
    const std::size_t n_est = estimators.size();

    // slot [rep * n_est + e]; NaN marks a failure.
    std::vector<double> slopes(reps * n_est,
                               std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> censored_counts(reps, 0);

    auto work = [&](std::size_t rep) {
        const CensoredSample sample = generate_replicate(scn, rep);
        censored_counts[rep] = sample.censored_count();
        for (std::size_t e = 0; e < n_est; ++e) {
            try {
                const FitResult result = fit(sample, estimators[e], base_cfg);
                slopes[rep * n_est + e] = result.beta.at(1);
            } catch (const std::exception&) {
                // left as NaN; counted below
            }
        }
    };

    const int worker_count =
        std::max(1, std::min<int>(threads, static_cast<int>(reps)));
    if (worker_count == 1) {
        for (std::size_t rep = 0; rep < reps; ++rep) work(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int t = 0; t < worker_count; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t rep = next.fetch_add(1);
                    if (rep >= reps) return;
                    work(rep);
                }
            });
        for (auto& th : pool) th.join();
    }

    SimulationResult result;
    result.replicates = reps;
    result.seed = scn.seed;
    const double true_slope = scn.beta0[1];
    for (std::size_t e = 0; e < n_est; ++e) {
        EstimatorSummary summary;
        summary.name = estimator_name(estimators[e]);
        summary.slopes.resize(reps);
        double acc = 0.0;
        std::size_t ok = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const double slope = slopes[rep * n_est + e];
            summary.slopes[rep] = slope;
            if (std::isnan(slope)) {
                ++summary.n_fail;
                continue;
            }
            const double err = slope - true_slope;
            acc += err * err;
            ++ok;
        }
        if (summary.n_fail * 20 > reps)
            throw NumericalError(std::string("estimator ") + summary.name +
                                 " failed on more than 5% of replicates (" +
                                 std::to_string(summary.n_fail) + "/" +
                                 std::to_string(reps) + ")");
        summary.mse = ok ? acc / static_cast<double>(ok) : 0.0;
        result.estimators.push_back(std::move(summary));
    }

    std::size_t censored_total = 0;
    for (std::size_t c : censored_counts) censored_total += c;
    result.censoring_rate = static_cast<double>(censored_total) /
                            (static_cast<double>(reps) * static_cast<double>(scn.n));
    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<CurvePoint> objective_curve(const CensoredSample& sample,
                                        const CurveConfig& cfg,
                                        const std::vector<double>& slope_grid) {
    if (sample.p() != 2)
        throw std::invalid_argument("objective curve requires simple regression (p = 2)");
    if (!(cfg.scale > 0.0)) throw std::invalid_argument("curve needs a positive scale");

    IRWLSConfig icfg;
    icfg.tol = cfg.irwls_tol;
    icfg.max_iter = cfg.irwls_max_iter;

    std::vector<CurvePoint> points;
    points.reserve(slope_grid.size());
    for (double slope : slope_grid) {
        const std::vector<double> beta{0.0, slope};
        const RedistributionWeights weights = kaplan_meier(residuals(sample, beta));

        InnerProblem prob{&weights, &sample, cfg.scale, cfg.loss};
        const InnerFitResult inner = irwls_minimize(prob, icfg);

        CurvePoint point;
        point.slope = slope;
        double norm = 0.0;
        for (double c : inner.coef) norm += c * c;
        point.inner_norm = std::sqrt(norm);
        // Score-equation value at this beta (slope component, inner
        // coefficients at zero).
        point.score = weights.expectation([&](double u, std::int32_t row) {
            return cfg.loss.psi(u / cfg.scale) *
                   sample.covariate(static_cast<std::size_t>(row), 1);
        });
        points.push_back(point);
    }
    return points;
}

}  // namespace censreg
