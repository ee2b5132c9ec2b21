#include "censreg/breakdown.hpp"

#include "censreg/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace censreg {

namespace {

// Number of rows whose covariate vector lies in the span of the selected
// subset (the hyperplane candidates are exactly the spans of <= p-1 rows).
std::size_t incidence_count(const CensoredSample& sample,
                            const std::vector<std::size_t>& subset) {
    const std::size_t p = sample.p();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(p),
                          static_cast<Eigen::Index>(subset.size()));
    for (std::size_t c = 0; c < subset.size(); ++c)
        for (std::size_t j = 0; j < p; ++j)
            basis(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
                sample.covariate(subset[c], j);
    // Orthonormal basis of the span via column-pivoted QR.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis);
    qr.setThreshold(1e-10);
    const auto rank = qr.rank();
    if (rank == static_cast<Eigen::Index>(p)) return 0;  // spans everything: no hyperplane
    const Eigen::MatrixXd q_full =
        qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), rank);

    std::size_t count = 0;
    Eigen::VectorXd x(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < sample.n(); ++i) {
        for (std::size_t j = 0; j < p; ++j)
            x(static_cast<Eigen::Index>(j)) = sample.covariate(i, j);
        const Eigen::VectorXd resid = x - q_full * (q_full.transpose() * x);
        if (resid.norm() <= 1e-9 * std::max(x.norm(), 1.0)) ++count;
    }
    return count;
}

std::uint64_t binomial_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    std::uint64_t acc = 1;
    for (std::size_t i = 0; i < k; ++i) {
        acc = acc * (n - i) / (i + 1);
        if (acc > cap) return cap + 1;
    }
    return acc;
}

}  // namespace

std::pair<std::size_t, bool> compute_q(const CensoredSample& sample,
                                       std::uint64_t exactness_budget,
                                       std::uint64_t seed) {
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();
    if (p == 1) {
        // Only directions +-1: q counts the zero covariates.
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (sample.covariate(i, 0) == 0.0) ++zeros;
        return {zeros, true};
    }

    std::size_t q = p - 1;  // any p-1 independent rows span a hyperplane

    // Total subsets of sizes 1..p-1.
    std::uint64_t total = 0;
    for (std::size_t k = 1; k <= p - 1; ++k) {
        total += binomial_capped(n, k, exactness_budget);
        if (total > exactness_budget) break;
    }

    if (total <= exactness_budget) {
        std::vector<std::size_t> subset;
        for (std::size_t k = 1; k <= p - 1; ++k) {
            subset.assign(k, 0);
            // enumerate k-combinations of 0..n-1
            for (std::size_t i = 0; i < k; ++i) subset[i] = i;
            for (;;) {
                q = std::max(q, incidence_count(sample, subset));
                std::size_t pos = k;
                while (pos > 0 && subset[pos - 1] == n - k + pos - 1) --pos;
                if (pos == 0) break;
                ++subset[pos - 1];
                for (std::size_t i = pos; i < k; ++i) subset[i] = subset[i - 1] + 1;
            }
        }
        return {q, true};
    }

    // Sampled lower bound.
    StreamRng rng(seed, 0, RngPurpose::probe);
    std::vector<std::size_t> subset(p - 1);
    const std::uint64_t draws = exactness_budget;
    for (std::uint64_t d = 0; d < draws; ++d) {
        for (std::size_t a = 0; a < p - 1;) {
            const std::size_t candidate = rng.uniform_below(n);
            bool dup = false;
            for (std::size_t b = 0; b < a; ++b) dup |= subset[b] == candidate;
            if (!dup) subset[a++] = candidate;
        }
        q = std::max(q, incidence_count(sample, subset));
    }
    return {q, false};
}

BreakdownReport breakdown_bound(const CensoredSample& sample, double b_over_a,
                                std::uint64_t exactness_budget) {
    if (!(b_over_a > 0.0 && b_over_a < 1.0))
        throw std::invalid_argument("b/a must lie strictly between 0 and 1");
    const SampleDiagnostics diag = validate(sample);
    if (!diag.full_rank) throw DataError("design matrix is rank deficient");

    BreakdownReport report;
    report.n = diag.n;
    report.p = diag.p;
    report.censored = diag.censored;
    report.b_over_a = b_over_a;
    const auto [q, exact] = compute_q(sample, exactness_budget);
    report.q = q;
    report.q_exact = exact;

    const double n = static_cast<double>(diag.n);
    const double m = static_cast<double>(diag.censored);
    report.k0 = std::min(n * (1.0 - b_over_a) - static_cast<double>(q) - m,
                         n * b_over_a - m);
    report.gamma_bound = std::max(report.k0, 0.0) / n;
    report.optimal_bound =
        (n - static_cast<double>(diag.p) + 1.0 - 2.0 * m) / (2.0 * n);
    return report;
}

ProbeResult empirical_breakdown_probe(const CensoredSample& sample, EstimatorKind kind,
                                      const SearchConfig& cfg, std::size_t k,
                                      const std::vector<double>& magnitudes,
                                      bool location_outliers) {
    if (k >= sample.n())
        throw std::invalid_argument("cannot replace the whole sample");

    const FitResult baseline = fit(sample, kind, cfg);
    ProbeResult probe;
    double base_norm = 0.0;
    for (double b : baseline.beta) base_norm += b * b;
    probe.baseline_norm = std::sqrt(base_norm);

    std::vector<std::size_t> indices(k);
    for (std::size_t i = 0; i < k; ++i) indices[i] = i;

    for (double magnitude : magnitudes) {
        std::vector<CensoredObservation> rows(k);
        for (std::size_t i = 0; i < k; ++i) {
            CensoredObservation& row = rows[i];
            row.covariates.assign(sample.p(), magnitude);
            if (sample.has_intercept()) row.covariates[0] = 1.0;
            row.event = 1;
            if (location_outliers) {
                row.covariates.assign(sample.p(), 0.0);
                if (sample.has_intercept()) row.covariates[0] = 1.0;
                row.response = magnitude;
            } else {
                row.response = magnitude * magnitude;
            }
        }
        const CensoredSample contaminated = sample.with_rows_replaced(indices, rows);
        FitResult shifted;
        try {
            shifted = fit(contaminated, kind, cfg);
        } catch (const std::exception& e) {
            throw NumericalError(std::string("probe refit failed at magnitude ") +
                                 std::to_string(magnitude) + ": " + e.what());
        }
        double displacement = 0.0;
        for (std::size_t a = 0; a < shifted.beta.size(); ++a) {
            const double d = shifted.beta[a] - baseline.beta[a];
            displacement += d * d;
        }
        displacement = std::sqrt(displacement);
        probe.displacement.push_back(displacement);
        probe.max_displacement = std::max(probe.max_displacement, displacement);
    }
    return probe;
}

}  // namespace censreg
