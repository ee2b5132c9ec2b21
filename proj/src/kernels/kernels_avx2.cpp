// AVX2+FMA kernel variants. This translation unit is compiled for the
// generic target; the vector paths are enabled per-function so the binary
// stays runnable on plain x86-64 (dispatch checks CPU features first).

#include "censreg/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>

namespace censreg::kernels::detail {

__attribute__((target("avx2,fma")))
double bisquare_weighted_sum_avx2(const double* v, const double* w, std::size_t n,
                                  double inv_cs) {
    const __m256d vinv = _mm256_set1_pd(inv_cs);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        __m256d t0 = _mm256_mul_pd(_mm256_loadu_pd(v + k), vinv);
        __m256d t1 = _mm256_mul_pd(_mm256_loadu_pd(v + k + 4), vinv);
        __m256d m0 = _mm256_max_pd(_mm256_fnmadd_pd(t0, t0, one), zero);
        __m256d m1 = _mm256_max_pd(_mm256_fnmadd_pd(t1, t1, one), zero);
        m0 = _mm256_mul_pd(_mm256_mul_pd(m0, m0), m0);
        m1 = _mm256_mul_pd(_mm256_mul_pd(m1, m1), m1);
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + k), _mm256_sub_pd(one, m0), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + k + 4), _mm256_sub_pd(one, m1), acc1);
    }
    for (; k + 4 <= n; k += 4) {
        __m256d t = _mm256_mul_pd(_mm256_loadu_pd(v + k), vinv);
        __m256d m = _mm256_max_pd(_mm256_fnmadd_pd(t, t, one), zero);
        m = _mm256_mul_pd(_mm256_mul_pd(m, m), m);
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + k), _mm256_sub_pd(one, m), acc0);
    }
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum2 = _mm_add_pd(lo, hi);
    double total = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
    for (; k < n; ++k) {
        const double t = v[k] * inv_cs;
        double m = 1.0 - t * t;
        if (m < 0.0) m = 0.0;
        total += w[k] * (1.0 - m * m * m);
    }
    return total;
}

__attribute__((target("avx2,fma")))
double tail_mass_avx2(const double* v, const double* w, std::size_t n,
                      double threshold) {
    const __m256d thr = _mm256_set1_pd(threshold);
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d a = _mm256_andnot_pd(signmask, _mm256_loadu_pd(v + k));
        __m256d mask = _mm256_cmp_pd(a, thr, _CMP_GE_OQ);
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(w + k)));
    }
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum2 = _mm_add_pd(lo, hi);
    double total = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
    for (; k < n; ++k) {
        const double a = v[k] < 0 ? -v[k] : v[k];
        if (a >= threshold) total += w[k];
    }
    return total;
}

__attribute__((target("avx2,fma")))
void bisquare_irwls_weights_avx2(const double* v, const double* w, std::size_t n,
                                 double inv_cs, double* out) {
    const __m256d vinv = _mm256_set1_pd(inv_cs);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d t = _mm256_mul_pd(_mm256_loadu_pd(v + k), vinv);
        __m256d m = _mm256_max_pd(_mm256_fnmadd_pd(t, t, one), zero);
        _mm256_storeu_pd(out + k,
                         _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_mul_pd(m, m)));
    }
    for (; k < n; ++k) {
        const double t = v[k] * inv_cs;
        double m = 1.0 - t * t;
        if (m < 0.0) m = 0.0;
        out[k] = w[k] * m * m;
    }
}

}  // namespace censreg::kernels::detail

#endif  // __x86_64__
