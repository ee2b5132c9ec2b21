#include "censreg/kernels.hpp"

namespace censreg::kernels::detail {

double bisquare_weighted_sum_scalar(const double* v, const double* w, std::size_t n,
                                    double inv_cs) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = v[k] * inv_cs;
        double m = 1.0 - t * t;
        if (m < 0.0) m = 0.0;
        acc += w[k] * (1.0 - m * m * m);
    }
    return acc;
}

double tail_mass_scalar(const double* v, const double* w, std::size_t n,
                        double threshold) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = v[k] < 0 ? -v[k] : v[k];
        if (a >= threshold) acc += w[k];
    }
    return acc;
}

void bisquare_irwls_weights_scalar(const double* v, const double* w, std::size_t n,
                                   double inv_cs, double* out) {
    for (std::size_t k = 0; k < n; ++k) {
        const double t = v[k] * inv_cs;
        double m = 1.0 - t * t;
        if (m < 0.0) m = 0.0;
        out[k] = w[k] * m * m;
    }
}

}  // namespace censreg::kernels::detail
