#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace censreg {

// Bad input data (rank-deficient design, all rows censored, malformed file).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A solver failed to produce a usable result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CensoredObservation {
    double response = 0.0;            // y* = min(y, c)
    std::vector<double> covariates;   // length p; first entry 1 when intercept
    int event = 1;                    // 1 = observed, 0 = right-censored
};

// Immutable sample of right-censored regression data. Covariates are stored
// row-major; when an intercept is requested the constant column is already
// part of the design, so every estimator treats the coefficient vector
// uniformly.
class CensoredSample {
public:
    CensoredSample() = default;

    CensoredSample(std::vector<double> response, std::vector<double> design_row_major,
                   std::vector<std::uint8_t> event, std::size_t p, bool has_intercept)
        : response_(std::move(response)),
          design_(std::move(design_row_major)),
          event_(std::move(event)),
          p_(p),
          has_intercept_(has_intercept) {
        if (p_ == 0) throw DataError("sample has no covariates");
        if (design_.size() != response_.size() * p_ || event_.size() != response_.size())
            throw DataError("sample arrays have inconsistent lengths");
        for (std::uint8_t d : event_)
            if (d > 1) throw DataError("status values must be 0 or 1");
    }

    static CensoredSample from_rows(const std::vector<CensoredObservation>& rows,
                                    bool has_intercept = false);

    std::size_t n() const { return response_.size(); }
    std::size_t p() const { return p_; }
    bool has_intercept() const { return has_intercept_; }

    double response(std::size_t i) const { return response_[i]; }
    int event(std::size_t i) const { return event_[i]; }
    std::size_t censored_count() const;

    std::span<const double> row(std::size_t i) const {
        return {design_.data() + i * p_, p_};
    }
    double covariate(std::size_t i, std::size_t j) const { return design_[i * p_ + j]; }

    const std::vector<double>& responses() const { return response_; }
    const std::vector<double>& design() const { return design_; }
    const std::vector<std::uint8_t>& events() const { return event_; }

    // Copy with selected rows replaced (used by breakdown probes).
    CensoredSample with_rows_replaced(const std::vector<std::size_t>& indices,
                                      const std::vector<CensoredObservation>& rows) const;

private:
    std::vector<double> response_;
    std::vector<double> design_;
    std::vector<std::uint8_t> event_;
    std::size_t p_ = 0;
    bool has_intercept_ = false;
};

struct ResidualVector {
    std::vector<double> values;        // r*_i(beta) = y*_i - beta'x_i
    std::vector<std::uint8_t> events;  // copied from the sample
    std::size_t size() const { return values.size(); }
};

ResidualVector residuals(const CensoredSample& sample, std::span<const double> beta);

struct SampleDiagnostics {
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t censored = 0;   // m
    std::size_t design_rank = 0;
    bool full_rank = false;
    bool all_censored = false;
    // Heuristic: true when no hyperplane through the origin holds more than
    // p-1 covariate rows (checked exactly only for small samples).
    bool general_position_hint = false;
};

SampleDiagnostics validate(const CensoredSample& sample);

// Throws DataError when the sample cannot be fit (rank deficiency, all
// censored, or n < p + 1).
void ensure_fittable(const CensoredSample& sample);

// Counters accumulated by the resampling search; used by tests and reported
// in CLI diagnostics.
struct SearchStats {
    std::uint64_t scale_solves = 0;    // full inner scale minimizations
    std::uint64_t kernel_evals = 0;    // loss-sum kernel passes
    std::uint64_t pruned_candidates = 0;
    std::uint64_t inner_evaluations = 0;
};

struct FitResult {
    std::vector<double> beta;
    double scale = 0.0;
    double objective = 0.0;             // estimator-specific criterion at the optimum
    std::size_t n_candidates_evaluated = 0;
    bool converged = true;
    bool exact_fit = false;
    SearchStats stats;
};

}  // namespace censreg
