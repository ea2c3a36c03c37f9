#pragma once

#include <cstdint>

namespace mtfwfm {

// Drop-in scalar that meters floating-point work. One "operation" is one
// floating add or one floating multiply; everything else (loads, conversions,
// the sigmoid) is free, matching how dot products are costed elsewhere in
// this library (length K = 2K-1 operations).
struct CountingScalar {
    double v = 0.0;

    CountingScalar() = default;
    explicit CountingScalar(double x) : v(x) {}

    static thread_local uint64_t adds;
    static thread_local uint64_t muls;
    static void reset() { adds = 0; muls = 0; }
    static uint64_t total() { return adds + muls; }

    friend CountingScalar operator+(CountingScalar a, CountingScalar b) {
        ++adds;
        return CountingScalar(a.v + b.v);
    }
    friend CountingScalar operator*(CountingScalar a, CountingScalar b) {
        ++muls;
        return CountingScalar(a.v * b.v);
    }
};

} // namespace mtfwfm
