// NEON lane for aarch64. float64x2 is baseline on aarch64, no cpuid needed.
#if defined(__aarch64__)

#include "mtfwfm/kernels.hpp"

#include <arm_neon.h>

namespace mtfwfm::kernels {

namespace {

double dot_neon(const double* a, const double* b, size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t k = 0;
    for (; k + 2 <= n; k += 2)
        acc = vfmaq_f64(acc, vld1q_f64(a + k), vld1q_f64(b + k));
    double out = vaddvq_f64(acc);
    for (; k < n; ++k) out += a[k] * b[k];
    return out;
}

double dot3_neon(const double* a, const double* b, const double* c, size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t ab = vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
        acc = vfmaq_f64(acc, ab, vld1q_f64(c + k));
    }
    double out = vaddvq_f64(acc);
    for (; k < n; ++k) out += a[k] * b[k] * c[k];
    return out;
}

void axpy_neon(double alpha, const double* x, double* y, size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    size_t k = 0;
    for (; k + 2 <= n; k += 2)
        vst1q_f64(y + k, vfmaq_f64(vld1q_f64(y + k), va, vld1q_f64(x + k)));
    for (; k < n; ++k) y[k] += alpha * x[k];
}

void axpy_mul_neon(double alpha, const double* a, const double* b, double* y, size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t ab = vmulq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
        vst1q_f64(y + k, vfmaq_f64(vld1q_f64(y + k), va, ab));
    }
    for (; k < n; ++k) y[k] += alpha * a[k] * b[k];
}

double sum_sq_neon(const double* x, size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t v = vld1q_f64(x + k);
        acc = vfmaq_f64(acc, v, v);
    }
    double out = vaddvq_f64(acc);
    for (; k < n; ++k) out += x[k] * x[k];
    return out;
}

} // namespace

const Ops kNeon = {
    dot_neon, dot3_neon, axpy_neon, axpy_mul_neon, sum_sq_neon, "neon",
};

} // namespace mtfwfm::kernels

#endif
