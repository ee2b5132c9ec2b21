#include "censreg/types.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace censreg {

CensoredSample CensoredSample::from_rows(const std::vector<CensoredObservation>& rows,
                                         bool has_intercept) {
    if (rows.empty()) throw DataError("empty sample");
    const std::size_t p = rows.front().covariates.size();
    std::vector<double> y, design;
    std::vector<std::uint8_t> events;
    y.reserve(rows.size());
    design.reserve(rows.size() * p);
    events.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.covariates.size() != p)
            throw DataError("covariate rows have mixed dimensions");
        if (row.event != 0 && row.event != 1)
            throw DataError("status values must be 0 or 1");
        y.push_back(row.response);
        design.insert(design.end(), row.covariates.begin(), row.covariates.end());
        events.push_back(static_cast<std::uint8_t>(row.event));
    }
    return CensoredSample(std::move(y), std::move(design), std::move(events), p,
                          has_intercept);
}

std::size_t CensoredSample::censored_count() const {
    std::size_t m = 0;
    for (std::uint8_t d : event_) m += (d == 0);
    return m;
}

CensoredSample CensoredSample::with_rows_replaced(
    const std::vector<std::size_t>& indices,
    const std::vector<CensoredObservation>& rows) const {
    if (indices.size() != rows.size())
        throw std::invalid_argument("index/row count mismatch");
    std::vector<double> y = response_;
    std::vector<double> design = design_;
    std::vector<std::uint8_t> events = event_;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t i = indices[k];
        if (i >= n()) throw std::invalid_argument("replacement index out of range");
        if (rows[k].covariates.size() != p_)
            throw std::invalid_argument("replacement row has wrong dimension");
        y[i] = rows[k].response;
        std::copy(rows[k].covariates.begin(), rows[k].covariates.end(),
                  design.begin() + static_cast<std::ptrdiff_t>(i * p_));
        events[i] = static_cast<std::uint8_t>(rows[k].event);
    }
    return CensoredSample(std::move(y), std::move(design), std::move(events), p_,
                          has_intercept_);
}

ResidualVector residuals(const CensoredSample& sample, std::span<const double> beta) {
    if (beta.size() != sample.p())
        throw std::invalid_argument("coefficient vector has wrong dimension");
    ResidualVector out;
    out.values.resize(sample.n());
    out.events = sample.events();
    for (std::size_t i = 0; i < sample.n(); ++i) {
        const auto x = sample.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) dot += beta[j] * x[j];
        out.values[i] = sample.response(i) - dot;
    }
    return out;
}

namespace {

// Exact general-position check for tiny samples: every hyperplane through the
// origin spanned by covariate rows holds at most p-1 of them. Larger samples
// get a cheap pairwise probe (p == 2) or are reported as unknown-true.
bool general_position_probe(const CensoredSample& sample) {
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();
    if (p == 1) {
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < n; ++i) zeros += sample.covariate(i, 0) == 0.0;
        return zeros == 0;
    }
    if (p == 2 && n <= 2000) {
        // Hyperplanes through the origin in R^2 are lines; x_i and x_j land on
        // a common one exactly when they are proportional.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t hits = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const double cross = sample.covariate(i, 0) * sample.covariate(j, 1) -
                                     sample.covariate(i, 1) * sample.covariate(j, 0);
                const double mag = std::abs(sample.covariate(i, 0)) +
                                   std::abs(sample.covariate(i, 1)) +
                                   std::abs(sample.covariate(j, 0)) +
                                   std::abs(sample.covariate(j, 1));
                if (std::abs(cross) <= 1e-12 * std::max(mag, 1.0)) ++hits;
            }
            if (hits > p - 1) return false;
        }
        return true;
    }
    return true;
}

}  // namespace

SampleDiagnostics validate(const CensoredSample& sample) {
    SampleDiagnostics diag;
    diag.n = sample.n();
    diag.p = sample.p();
    diag.censored = sample.censored_count();
    diag.all_censored = diag.censored == diag.n;

    Eigen::MatrixXd design(static_cast<Eigen::Index>(diag.n),
                           static_cast<Eigen::Index>(diag.p));
    for (std::size_t i = 0; i < diag.n; ++i)
        for (std::size_t j = 0; j < diag.p; ++j)
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                sample.covariate(i, j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    diag.design_rank = static_cast<std::size_t>(qr.rank());
    diag.full_rank = diag.design_rank == diag.p;
    diag.general_position_hint = diag.full_rank && general_position_probe(sample);
    return diag;
}

void ensure_fittable(const CensoredSample& sample) {
    const SampleDiagnostics diag = validate(sample);
    if (diag.all_censored) throw DataError("every observation is censored");
    if (!diag.full_rank)
        throw DataError("design matrix is rank deficient (rank " +
                        std::to_string(diag.design_rank) + " < p = " +
                        std::to_string(diag.p) + ")");
    if (diag.n < diag.p + 1)
        throw DataError("need at least p + 1 observations");
}

}  // namespace censreg
