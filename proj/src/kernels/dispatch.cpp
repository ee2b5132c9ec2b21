#include "censreg/kernels.hpp"

#include <atomic>

namespace censreg::kernels {

namespace detail {

double bisquare_weighted_sum_scalar(const double*, const double*, std::size_t, double);
double tail_mass_scalar(const double*, const double*, std::size_t, double);
void bisquare_irwls_weights_scalar(const double*, const double*, std::size_t, double,
                                   double*);

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define CENSREG_HAVE_AVX2_KERNELS 1
double bisquare_weighted_sum_avx2(const double*, const double*, std::size_t, double);
double tail_mass_avx2(const double*, const double*, std::size_t, double);
void bisquare_irwls_weights_avx2(const double*, const double*, std::size_t, double,
                                 double*);
#endif

}  // namespace detail

namespace {

std::atomic<bool> g_force_scalar{false};

bool use_avx2() {
#ifdef CENSREG_HAVE_AVX2_KERNELS
    static const bool supported =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported && !g_force_scalar.load(std::memory_order_relaxed);
#else
    return false;
#endif
}

}  // namespace

void set_force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

const char* active_implementation() { return use_avx2() ? "avx2" : "scalar"; }

double bisquare_weighted_sum(const double* v, const double* w, std::size_t n,
                             double inv_cs) {
#ifdef CENSREG_HAVE_AVX2_KERNELS
    if (use_avx2()) return detail::bisquare_weighted_sum_avx2(v, w, n, inv_cs);
#endif
    return detail::bisquare_weighted_sum_scalar(v, w, n, inv_cs);
}

double tail_mass(const double* v, const double* w, std::size_t n, double threshold) {
#ifdef CENSREG_HAVE_AVX2_KERNELS
    if (use_avx2()) return detail::tail_mass_avx2(v, w, n, threshold);
#endif
    return detail::tail_mass_scalar(v, w, n, threshold);
}

void bisquare_irwls_weights(const double* v, const double* w, std::size_t n,
                            double inv_cs, double* out) {
#ifdef CENSREG_HAVE_AVX2_KERNELS
    if (use_avx2()) {
        detail::bisquare_irwls_weights_avx2(v, w, n, inv_cs, out);
        return;
    }
#endif
    detail::bisquare_irwls_weights_scalar(v, w, n, inv_cs, out);
}

}  // namespace censreg::kernels
