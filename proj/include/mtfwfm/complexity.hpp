#pragma once

#include "mtfwfm/model.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace mtfwfm {

// Closed-form number of learnable scalars of the multi-task model:
// T + M*K + N*T*K + N*(N-1)/2 * T.
int64_t count_params(const ModelConfig& config);

// Per-inference floating operations (adds + multiplies) of the multi-task
// model. `main` and `interaction` are the component formulas
// N*(2K-1)+(N-1) and C(N,2)*2K+C(N,2)-1; `closed_form_total` is the rounded
// total N^2*K+N*K+C(N,2), which exceeds the component sum by the two adds
// that join bias, main and interaction groups.
struct OpCounts {
    int64_t main = 0;
    int64_t interaction = 0;
    int64_t closed_form_total = 0;
    int64_t component_sum = 0;
};

OpCounts count_ops(const ModelConfig& config);

// Per-inference operations of the 3-way type-as-field model:
// (5/2*N^2 + 3/2*N + 2)*K + C(N,2).
int64_t count_ops_3way(const ModelConfig& config);

// Adds/multiplies actually performed by the reference forward pass, metered
// with a counting scalar, split by term group. `glue` is the handful of adds
// joining the groups and the bias.
struct InstrumentedOps {
    uint64_t main = 0;
    uint64_t interaction = 0;
    uint64_t triple = 0; // fwfm_ctf3 only
    uint64_t glue = 0;
    uint64_t total = 0;
};

InstrumentedOps instrument_forward(const ModelConfig& config);

struct LatencyStats {
    double median_ns = 0.0;
    double p99_ns = 0.0;
};

// Wall time per forward pass over `reps` single-inference measurements after
// warmup. Single-threaded.
LatencyStats bench_inference(const ModelParams& params, std::span<const SparseInstance> instances,
                             uint32_t reps);

struct ComplexityReport {
    uint32_t num_fields = 0, num_features = 0, num_types = 0, embed_dim = 0;
    int64_t param_count_formula = 0;
    int64_t param_count_actual = 0;
    OpCounts ops;
    int64_t ops_3way_formula = 0;
    double ops_ratio_3way_over_mt = 0.0; // Eq-level ratio of the two totals
    InstrumentedOps instrumented_mt;
    InstrumentedOps instrumented_3way;
    bool has_latency = false;
    LatencyStats latency_mt, latency_3way;
    double latency_ratio = 0.0;
};

// Formula evaluation, allocation cross-check, instrumented forwards, and
// (for reps > 0) a micro-benchmark of both model kinds on random instances.
ComplexityReport complexity_report(uint32_t num_fields, uint32_t num_features, uint32_t num_types,
                                   uint32_t embed_dim, uint32_t reps, uint64_t seed);

std::string complexity_report_json(const ComplexityReport& report);
std::string complexity_report_table(const ComplexityReport& report);

} // namespace mtfwfm
