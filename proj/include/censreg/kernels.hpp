#pragma once

#include <cstddef>

namespace censreg::kernels {

// Inner-loop kernels for the weighted loss sums that dominate the scale
// solvers and objective evaluations. Each has a scalar reference
// implementation and an AVX2+FMA variant selected at runtime; the two are
// equivalence-tested against each other.
//
// unit bisquare: f(t) = 1 - (1 - t^2)_+^3, in [0, 1]. Callers fold the
// tuning constant and the candidate scale into inv_cs = 1/(c*s) and multiply
// the result by sup(rho) = c^2/6 to recover the rho sum.

// sum_k w[k] * f(v[k] * inv_cs)
double bisquare_weighted_sum(const double* v, const double* w, std::size_t n,
                             double inv_cs);

// sum_k w[k] * I(|v[k]| >= threshold)   (jump-loss sum / tail mass)
double tail_mass(const double* v, const double* w, std::size_t n, double threshold);

// out[k] = w[k] * (1 - (v[k]*inv_cs)^2)_+^2   (bisquare IRWLS weights)
void bisquare_irwls_weights(const double* v, const double* w, std::size_t n,
                            double inv_cs, double* out);

// Force the scalar path (tests); auto-detection otherwise.
void set_force_scalar(bool on);
const char* active_implementation();

}  // namespace censreg::kernels
