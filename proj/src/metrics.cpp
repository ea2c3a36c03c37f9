#include "mtfwfm/metrics.hpp"

#include "mtfwfm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtfwfm {

double auc(std::span<const ScoredSample> samples) {
    size_t num_pos = 0;
    std::vector<std::pair<double, uint8_t>> sorted;
    sorted.reserve(samples.size());
    for (const auto& s : samples) {
        if (!std::isfinite(s.score)) throw DataError("non-finite score");
        sorted.emplace_back(s.score, s.label ? 1 : 0);
        num_pos += s.label ? 1 : 0;
    }
    const size_t n = sorted.size();
    const size_t num_neg = n - num_pos;
    if (num_pos == 0 || num_neg == 0)
        throw DataError("AUC undefined: need at least one positive and one negative sample");

    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    // Rank sum of positives with average ranks across tie groups.
    double pos_rank_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        size_t tied_pos = 0;
        while (j < n && sorted[j].first == sorted[i].first) {
            tied_pos += sorted[j].second;
            ++j;
        }
        const double avg_rank = 0.5 * (double(i + 1) + double(j)); // ranks are 1-based
        pos_rank_sum += avg_rank * double(tied_pos);
        i = j;
    }
    const double u = pos_rank_sum - double(num_pos) * double(num_pos + 1) / 2.0;
    return u / (double(num_pos) * double(num_neg));
}

MetricsReport report(std::span<const ScoredSample> samples, const TypeWeights& weights) {
    if (samples.empty()) throw DataError("cannot compute metrics on an empty sample set");

    uint32_t max_type = 0;
    for (const auto& s : samples) max_type = std::max(max_type, s.conv_type);
    const size_t num_types = size_t(max_type) + 1;

    std::vector<std::vector<ScoredSample>> by_type(num_types);
    for (const auto& s : samples) by_type[s.conv_type].push_back(s);

    MetricsReport out;
    double weighted_num = 0.0;
    double weighted_den = 0.0;
    size_t computable = 0;
    for (uint32_t t = 0; t < num_types; ++t) {
        if (by_type[t].empty()) continue;
        TypeMetrics tm;
        tm.type = t;
        tm.count = by_type[t].size();
        for (const auto& s : by_type[t]) tm.positives += s.label ? 1 : 0;
        tm.weight = t < weights.size() ? weights[t] : double(tm.count);
        if (tm.weight < 0.0) throw DataError("negative type weight");
        if (tm.positives == 0 || tm.positives == tm.count) {
            tm.excluded = true;
            tm.auc = std::numeric_limits<double>::quiet_NaN();
            ++out.excluded_types;
        } else {
            tm.auc = auc(by_type[t]);
            weighted_num += tm.auc * tm.weight;
            weighted_den += tm.weight;
            ++computable;
        }
        out.per_type.push_back(tm);
    }
    if (computable == 0)
        throw DataError("no conversion type has both classes; weighted AUC undefined");
    if (weighted_den <= 0.0) throw DataError("type weights sum to zero over computable types");

    out.auc_overall = auc(samples);
    out.auc_weighted = weighted_num / weighted_den;
    return out;
}

} // namespace mtfwfm
