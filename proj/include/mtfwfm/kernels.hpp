#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace mtfwfm::kernels {

// Inner-loop vector kernels over contiguous double arrays. Every entry point
// has a scalar reference implementation plus SIMD variants (AVX2+FMA on
// x86-64, NEON on aarch64) selected once at startup. SIMD variants may differ
// from the scalar results by floating-point reassociation only.
struct Ops {
    // sum_k a[k] * b[k]
    double (*dot)(const double* a, const double* b, size_t n);
    // sum_k a[k] * b[k] * c[k]
    double (*dot3)(const double* a, const double* b, const double* c, size_t n);
    // y[k] += alpha * x[k]
    void (*axpy)(double alpha, const double* x, double* y, size_t n);
    // y[k] += alpha * a[k] * b[k]
    void (*axpy_mul)(double alpha, const double* a, const double* b, double* y, size_t n);
    // sum_k x[k]^2
    double (*sum_sq)(const double* x, size_t n);
    const char* name;
};

// Kernel table in use. Defaults to the best lane the CPU supports, or the
// lane named in MTFWFM_KERNELS ("scalar", "avx2", "neon", "auto").
const Ops& active();

// Scalar reference lane, always available.
const Ops& scalar();

// Force a lane by name; returns false (and leaves the selection unchanged)
// if the lane is unknown or unsupported on this CPU.
bool select(std::string_view name);

// Names of lanes usable on this CPU, e.g. "scalar,avx2".
std::string available();

} // namespace mtfwfm::kernels
