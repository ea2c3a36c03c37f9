#include "mtfwfm/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace mtfwfm::kernels {

namespace {

double dot_scalar(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) acc += a[k] * b[k];
    return acc;
}

double dot3_scalar(const double* a, const double* b, const double* c, size_t n) {
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) acc += a[k] * b[k] * c[k];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, size_t n) {
    for (size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
}

void axpy_mul_scalar(double alpha, const double* a, const double* b, double* y, size_t n) {
    for (size_t k = 0; k < n; ++k) y[k] += alpha * a[k] * b[k];
}

double sum_sq_scalar(const double* x, size_t n) {
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) acc += x[k] * x[k];
    return acc;
}

const Ops kScalar = {
    dot_scalar, dot3_scalar, axpy_scalar, axpy_mul_scalar, sum_sq_scalar, "scalar",
};

} // namespace

#if defined(__x86_64__) || defined(_M_X64)
extern const Ops kAvx2; // kernels_avx2.cpp
bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif
#if defined(__aarch64__)
extern const Ops kNeon; // kernels_neon.cpp
#endif

namespace {

const Ops* pick_default() {
    const char* env = std::getenv("MTFWFM_KERNELS");
    if (env && env[0] != '\0' && std::string_view(env) != "auto") {
        std::string_view want(env);
        if (want == "scalar") return &kScalar;
#if defined(__x86_64__) || defined(_M_X64)
        if (want == "avx2" && cpu_has_avx2()) return &kAvx2;
#endif
#if defined(__aarch64__)
        if (want == "neon") return &kNeon;
#endif
        // Unknown or unsupported request: fall through to auto.
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) return &kAvx2;
#endif
#if defined(__aarch64__)
    return &kNeon;
#endif
    return &kScalar;
}

std::atomic<const Ops*> g_active{nullptr};

const Ops* load_active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = pick_default();
        g_active.store(ops, std::memory_order_release);
    }
    return ops;
}

} // namespace

const Ops& active() { return *load_active(); }

const Ops& scalar() { return kScalar; }

bool select(std::string_view name) {
    if (name == "auto") {
        const char* save = std::getenv("MTFWFM_KERNELS");
        (void)save;
        g_active.store(nullptr, std::memory_order_release);
        load_active();
        return true;
    }
    if (name == "scalar") {
        g_active.store(&kScalar, std::memory_order_release);
        return true;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2" && cpu_has_avx2()) {
        g_active.store(&kAvx2, std::memory_order_release);
        return true;
    }
#endif
#if defined(__aarch64__)
    if (name == "neon") {
        g_active.store(&kNeon, std::memory_order_release);
        return true;
    }
#endif
    return false;
}

std::string available() {
    std::string out = "scalar";
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) out += ",avx2";
#endif
#if defined(__aarch64__)
    out += ",neon";
#endif
    return out;
}

} // namespace mtfwfm::kernels
