// AVX2+FMA lane. This translation unit is compiled with -mavx2 -mfma; it is
// only entered after a runtime cpuid check in kernels.cpp.
#if defined(__x86_64__) || defined(_M_X64)

#include "mtfwfm/kernels.hpp"

#include <immintrin.h>

namespace mtfwfm::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= n; k += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc);
    double out = hsum(acc);
    for (; k < n; ++k) out += a[k] * b[k];
    return out;
}

double dot3_avx2(const double* a, const double* b, const double* c, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + k), acc);
    }
    double out = hsum(acc);
    for (; k < n; ++k) out += a[k] * b[k] * c[k];
    return out;
}

void axpy_avx2(double alpha, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k));
        _mm256_storeu_pd(y + k, vy);
    }
    for (; k < n; ++k) y[k] += alpha * x[k];
}

void axpy_mul_avx2(double alpha, const double* a, const double* b, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        __m256d vy = _mm256_fmadd_pd(va, ab, _mm256_loadu_pd(y + k));
        _mm256_storeu_pd(y + k, vy);
    }
    for (; k < n; ++k) y[k] += alpha * a[k] * b[k];
}

double sum_sq_avx2(const double* x, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d v = _mm256_loadu_pd(x + k);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double out = hsum(acc);
    for (; k < n; ++k) out += x[k] * x[k];
    return out;
}

} // namespace

const Ops kAvx2 = {
    dot_avx2, dot3_avx2, axpy_avx2, axpy_mul_avx2, sum_sq_avx2, "avx2",
};

} // namespace mtfwfm::kernels

#endif
