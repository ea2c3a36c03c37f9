#pragma once

#include "mtfwfm/pipeline.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mtfwfm {

// Synthetic impression/conversion logs with planted per-type pairwise
// structure: the conversion probability of an impression is a logistic model
// whose interaction terms flip sign with the parity of the planted pair's
// feature indices. Parity of a sum is independent of each index alone, so a
// planted pair carries pairwise signal without main effects.
struct SyntheticField {
    std::string name;
    uint32_t cardinality = 2;
};

struct PlantedPair {
    std::string type;    // conversion type name
    std::string field_p;
    std::string field_q;
    double effect = 0.0; // added to the log-odds, sign flipped by parity
};

struct GenConfig {
    uint32_t num_days = 9;
    uint32_t impressions_per_day = 20000;
    uint32_t num_users = 50000;
    std::vector<std::string> type_names;
    std::vector<uint32_t> lines_per_type;  // per type
    std::vector<double> base_rate;         // per type, in (0, 1)
    std::vector<SyntheticField> fields;
    std::vector<PlantedPair> planted;
    int64_t window_seconds = 6 * kSecondsPerDay;
    uint64_t seed = 1;

    void validate() const; // throws DataError
};

struct SyntheticLogs {
    std::vector<ImpressionRecord> impressions;
    std::vector<ConversionRecord> conversions;
    std::vector<LineRecord> lines;
};

// Fully seed-deterministic; per-day streams are derived from the main seed.
SyntheticLogs generate_synthetic(const GenConfig& config);

} // namespace mtfwfm
