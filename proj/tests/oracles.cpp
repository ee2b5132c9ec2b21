#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracles {

std::vector<double> product_limit_masses(const std::vector<double>& values,
                                         const std::vector<std::uint8_t>& events) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        if (events[a] != events[b]) return events[a] > events[b];
        return a < b;
    });

    std::vector<std::uint8_t> effective(events);
    effective[order.back()] = 1;  // terminal convention

    std::vector<double> mass(n, 0.0);
    double survival = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t idx = order[k];
        if (!effective[idx]) continue;
        const double at_risk = static_cast<double>(n - k);
        mass[idx] = survival / at_risk;
        survival -= mass[idx];
    }
    return mass;
}

double uncensored_m_scale(const censreg::LossFunction& loss, double b,
                          const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    auto h = [&](double s) {
        double acc = 0.0;
        for (double v : values) acc += loss.rho(v / s);
        return acc / n;
    };
    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) return 0.0;
    // Mass near zero may leave no positive root.
    double zero_mass = 0.0;
    for (double v : values) zero_mass += std::abs(v) <= 1e-12 * vmax ? 1.0 : 0.0;
    if (loss.sup() * (1.0 - zero_mass / n) < b + 1e-12) return 0.0;
    if (loss.kind() == censreg::LossKind::jump) {
        std::vector<double> abs_values;
        abs_values.reserve(values.size());
        for (double v : values) abs_values.push_back(std::abs(v));
        std::sort(abs_values.begin(), abs_values.end());
        const double want = (1.0 - b) * n - 1e-12 * n;
        double cum = 0.0;
        for (double v : abs_values) {
            cum += 1.0;
            if (cum >= want) return v;
        }
        return abs_values.back();
    }
    double lo = vmax * 1e-12, hi = vmax * 1e6;
    while (h(lo) <= b) lo /= 8.0;
    while (h(hi) >= b) hi *= 8.0;
    for (int it = 0; it < 500; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h(mid) > b)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double median_abs(std::vector<double> values) {
    for (double& v : values) v = std::abs(v);
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

namespace {

// Dense p x p normal-equation solve by Gaussian elimination with partial
// pivoting (kept Eigen-free so the oracle path shares nothing with the
// library's solver stack).
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> rhs) {
    const std::size_t p = rhs.size();
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < p; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        const double diag = a[col][col];
        if (diag == 0.0) throw std::runtime_error("singular oracle system");
        for (std::size_t row = col + 1; row < p; ++row) {
            const double f = a[row][col] / diag;
            for (std::size_t c2 = col; c2 < p; ++c2) a[row][c2] -= f * a[col][c2];
            rhs[row] -= f * rhs[col];
        }
    }
    std::vector<double> x(p, 0.0);
    for (std::size_t col = p; col-- > 0;) {
        double acc = rhs[col];
        for (std::size_t c2 = col + 1; c2 < p; ++c2) acc -= a[col][c2] * x[c2];
        x[col] = acc / a[col][col];
    }
    return x;
}

std::vector<double> weighted_ls(const censreg::CensoredSample& sample,
                                const std::vector<double>& response,
                                const std::vector<double>& weight) {
    const std::size_t p = sample.p();
    std::vector<std::vector<double>> normal(p, std::vector<double>(p, 0.0));
    std::vector<double> rhs(p, 0.0);
    for (std::size_t i = 0; i < sample.n(); ++i) {
        const double w = weight[i];
        if (w == 0.0) continue;
        const auto x = sample.row(i);
        for (std::size_t a = 0; a < p; ++a) {
            rhs[a] += w * x[a] * response[i];
            for (std::size_t b = 0; b < p; ++b) normal[a][b] += w * x[a] * x[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) normal[a][a] += 1e-12;
    return solve_dense(std::move(normal), std::move(rhs));
}

double vec_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

}  // namespace

std::vector<double> uncensored_irwls(const censreg::CensoredSample& sample,
                                     const std::vector<double>& response_residuals,
                                     const censreg::LossFunction& loss, double scale,
                                     int max_iter, double tol) {
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();
    std::vector<double> coef(p, 0.0);
    std::vector<double> weight(n);
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = sample.row(i);
            double fit = 0.0;
            for (std::size_t j = 0; j < p; ++j) fit += coef[j] * x[j];
            weight[i] = loss.weight((response_residuals[i] - fit) / scale) / n;
        }
        std::vector<double> next = weighted_ls(sample, response_residuals, weight);
        double step = 0.0;
        for (std::size_t j = 0; j < p; ++j) step += (next[j] - coef[j]) * (next[j] - coef[j]);
        coef = next;
        if (std::sqrt(step) <= tol * (1.0 + vec_norm(coef))) break;
    }
    return coef;
}

std::vector<double> ols(const censreg::CensoredSample& sample,
                        const std::vector<double>& y) {
    std::vector<double> weight(sample.n(), 1.0);
    return weighted_ls(sample, y, weight);
}

namespace {

std::vector<double> residual_at(const censreg::CensoredSample& sample,
                                const std::vector<double>& beta) {
    std::vector<double> out(sample.n());
    for (std::size_t i = 0; i < sample.n(); ++i) {
        const auto x = sample.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) dot += beta[j] * x[j];
        out[i] = sample.response(i) - dot;
    }
    return out;
}

std::vector<double> shift_by(const std::vector<double>& residual,
                             const censreg::CensoredSample& sample,
                             const std::vector<double>& gamma) {
    std::vector<double> out(residual.size());
    for (std::size_t i = 0; i < residual.size(); ++i) {
        const auto x = sample.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) dot += gamma[j] * x[j];
        out[i] = residual[i] - dot;
    }
    return out;
}

template <typename Criterion>
UncensoredSearchResult candidate_norm_search(
    const censreg::CensoredSample& sample,
    const std::vector<std::vector<double>>& candidates, Criterion inner_best) {
    // inner_best(residuals) -> inner coefficient vector; selection is by the
    // Euclidean norm of that vector (identity metric).
    UncensoredSearchResult best;
    bool have = false;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const std::vector<double> res = residual_at(sample, candidates[j]);
        const std::vector<double> inner = inner_best(res);
        double norm2 = 0.0;
        for (double v : inner) norm2 += v * v;
        if (!have || norm2 < best.criterion) {
            best.beta = candidates[j];
            best.criterion = norm2;
            best.index = j;
            have = true;
        }
    }
    return best;
}

}  // namespace

UncensoredSearchResult uncensored_s_search(
    const censreg::CensoredSample& sample,
    const std::vector<std::vector<double>>& candidates,
    const censreg::LossFunction& rho1, double b) {
    UncensoredSearchResult best;
    double best_scale = 0.0;
    bool have = false;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const std::vector<double> res = residual_at(sample, candidates[j]);
        double omega = 0.0;
        std::size_t winner = 0;
        bool first = true;
        for (std::size_t r = 0; r < candidates.size(); ++r) {
            std::vector<double> gamma(sample.p());
            for (std::size_t a = 0; a < sample.p(); ++a)
                gamma[a] = candidates[r][a] - candidates[j][a];
            const double s =
                uncensored_m_scale(rho1, b, shift_by(res, sample, gamma));
            if (first || s < omega) {
                omega = s;
                winner = r;
                first = false;
            }
        }
        double norm2 = 0.0;
        for (std::size_t a = 0; a < sample.p(); ++a) {
            const double d = candidates[winner][a] - candidates[j][a];
            norm2 += d * d;
        }
        // lexicographic (norm, scale, index), matching the library rule
        if (!have || norm2 < best.criterion ||
            (norm2 == best.criterion && omega < best_scale)) {
            best.beta = candidates[j];
            best.criterion = norm2;
            best.index = j;
            best_scale = omega;
            have = true;
        }
    }
    return best;
}

UncensoredSearchResult uncensored_lms_search(
    const censreg::CensoredSample& sample,
    const std::vector<std::vector<double>>& candidates) {
    return uncensored_s_search(sample, candidates, censreg::LossFunction::jump(), 0.5);
}

UncensoredSearchResult uncensored_tau_search(
    const censreg::CensoredSample& sample,
    const std::vector<std::vector<double>>& candidates,
    const censreg::LossFunction& rho1, double b, const censreg::LossFunction& rho2) {
    UncensoredSearchResult best;
    double best_scale = 0.0;
    bool have = false;
    const double n = static_cast<double>(sample.n());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const std::vector<double> res = residual_at(sample, candidates[j]);
        double omega = 0.0;
        std::size_t winner = 0;
        bool first = true;
        for (std::size_t r = 0; r < candidates.size(); ++r) {
            std::vector<double> gamma(sample.p());
            for (std::size_t a = 0; a < sample.p(); ++a)
                gamma[a] = candidates[r][a] - candidates[j][a];
            const std::vector<double> shifted = shift_by(res, sample, gamma);
            const double s = uncensored_m_scale(rho1, b, shifted);
            double tau = 0.0;
            if (s > 0.0) {
                double acc = 0.0;
                for (double v : shifted) acc += rho2.rho(v / s);
                tau = s * std::sqrt(acc / n);
            }
            if (first || tau < omega) {
                omega = tau;
                winner = r;
                first = false;
            }
        }
        double norm2 = 0.0;
        for (std::size_t a = 0; a < sample.p(); ++a) {
            const double d = candidates[winner][a] - candidates[j][a];
            norm2 += d * d;
        }
        if (!have || norm2 < best.criterion ||
            (norm2 == best.criterion && omega < best_scale)) {
            best.beta = candidates[j];
            best.criterion = norm2;
            best.index = j;
            best_scale = omega;
            have = true;
        }
    }
    return best;
}

UncensoredSearchResult uncensored_m_search(
    const censreg::CensoredSample& sample,
    const std::vector<std::vector<double>>& candidates,
    const censreg::LossFunction& rho, double scale) {
    return candidate_norm_search(sample, candidates, [&](const std::vector<double>& res) {
        return uncensored_irwls(sample, res, rho, scale);
    });
}

std::vector<double> uncensored_l1_regression(const censreg::CensoredSample& sample,
                                             const std::vector<double>& y) {
    // Dense mirror of the library's L1 scheme on the unweighted empirical
    // distribution: fixed point of beta <- beta + gamma(beta), where gamma is
    // the smoothed-IRLS L1 fit of the current residuals (smoothing 1e-6 times
    // their median magnitude). Shares no code with the atom-based path.
    const std::size_t n = sample.n();
    const std::size_t p = sample.p();
    std::vector<double> beta = ols(sample, y);

    auto residual = [&](const std::vector<double>& b) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto x = sample.row(i);
            double fit = 0.0;
            for (std::size_t j = 0; j < p; ++j) fit += b[j] * x[j];
            out[i] = y[i] - fit;
        }
        return out;
    };

    std::vector<double> weight(n);
    for (int outer = 0; outer < 100; ++outer) {
        const std::vector<double> res = residual(beta);
        const double smoothing = std::max(1e-6 * median_abs(res), 1e-300);
        std::vector<double> gamma(p, 0.0);
        for (int it = 0; it < 200; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto x = sample.row(i);
                double fit = 0.0;
                for (std::size_t j = 0; j < p; ++j) fit += gamma[j] * x[j];
                weight[i] = 1.0 / (n * std::max(std::abs(res[i] - fit), smoothing));
            }
            std::vector<double> next = weighted_ls(sample, res, weight);
            double step = 0.0;
            for (std::size_t j = 0; j < p; ++j)
                step += (next[j] - gamma[j]) * (next[j] - gamma[j]);
            gamma = next;
            if (std::sqrt(step) <= 1e-10 * (1.0 + vec_norm(gamma))) break;
        }
        for (std::size_t j = 0; j < p; ++j) beta[j] += gamma[j];
        if (vec_norm(gamma) <= 1e-10 * (1.0 + vec_norm(beta))) break;
    }
    return beta;
}

double normal_rho_quadrature(const censreg::LossFunction& loss, double s) {
    const double hi = 10.0 * std::max(1.0, s);
    const int steps = 8192;
    const double h = hi / steps;
    auto f = [&](double u) {
        return loss.rho(u / s) * std::exp(-0.5 * u * u) /
               std::sqrt(2.0 * 3.14159265358979323846);
    };
    double acc = f(0.0) + f(hi);
    for (int k = 1; k < steps; ++k) acc += f(k * h) * (k % 2 ? 4.0 : 2.0);
    double total = 2.0 * acc * h / 3.0;
    if (loss.bounded()) total += loss.rho(hi / s) * std::erfc(hi / std::sqrt(2.0));
    return total;
}

}  // namespace oracles
