#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mtfwfm {

struct ScoredSample {
    double score = 0.0;
    uint8_t label = 0;
    uint32_t conv_type = 0;
};

// Per-type averaging weights; by convention weight[t] is the spend of type t,
// falling back to the type's sample count when no spend data exists.
using TypeWeights = std::vector<double>;

struct TypeMetrics {
    uint32_t type = 0;
    size_t count = 0;
    size_t positives = 0;
    double auc = 0.0;       // NaN when excluded
    double weight = 0.0;
    bool excluded = false;  // single-class type, left out of the weighted AUC
};

struct MetricsReport {
    double auc_overall = 0.0;
    double auc_weighted = 0.0;
    std::vector<TypeMetrics> per_type;
    size_t excluded_types = 0;
};

// Probability that a random positive outranks a random negative, ties
// counting one half. Computed by rank sums with average ranks, O(n log n).
// Throws DataError unless both classes are present.
double auc(std::span<const ScoredSample> samples);

// Per-type AUC, pooled overall AUC, and the weighted AUC over the types where
// both classes occur. Single-class types are reported as excluded and drop
// out of both the weighted numerator and denominator. `weights` may be empty
// (then per-type counts are used) or indexed by conversion type.
// Throws DataError when no type is computable.
MetricsReport report(std::span<const ScoredSample> samples, const TypeWeights& weights = {});

} // namespace mtfwfm
