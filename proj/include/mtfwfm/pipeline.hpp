#pragma once

#include "mtfwfm/schema.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtfwfm {

// Raw log records. Field values are kept in a sorted map so serialized logs
// are byte-stable.
struct ImpressionRecord {
    int64_t ts = 0; // epoch seconds
    std::string user_id;
    std::string line_id;
    std::map<std::string, std::string> field_values;
};

struct ConversionRecord {
    int64_t ts = 0;
    std::string user_id;
    std::string line_id;
    std::string conv_type;
};

// A line carries exactly one conversion type.
struct LineRecord {
    std::string line_id;
    std::string conv_type;
};

inline constexpr int64_t kSecondsPerDay = 86400;
inline constexpr const char* kMissingToken = "__missing__";

struct PipelineConfig {
    int32_t train_day_begin = 0; // inclusive
    int32_t train_day_end = 6;   // inclusive
    int32_t val_day = 7;
    int32_t test_day = 8;
    int64_t window_seconds = 6 * kSecondsPerDay;
    double negative_keep_prob = 1.0; // training split only
    uint32_t min_feature_freq = 2;   // rarer training values fold into OOV
    uint64_t seed = 1;

    void validate() const; // throws DataError
};

// Conversion type ids: names sorted lexicographically, so ids do not depend
// on log order.
std::vector<std::string> collect_type_names(std::span<const ConversionRecord> conversions,
                                            std::span<const LineRecord> lines);

// line_id -> type id, from explicit line records plus inference over the
// conversions of lines without a record. Conflicting conversion types for
// one line throw DataError.
std::unordered_map<std::string, uint32_t> resolve_line_types(std::span<const ConversionRecord> conversions,
                                                             std::span<const LineRecord> lines,
                                                             const std::vector<std::string>& type_names);

struct AttributionResult {
    std::vector<uint8_t> label;      // per impression
    std::vector<uint32_t> conv_type; // per impression: its line's type
    size_t conversions_total = 0;
    size_t conversions_attributed = 0;
    size_t conversions_unmatched = 0;
    size_t positives = 0;
};

// Last-touch attribution: each conversion credits the latest impression of
// the same (user, line) with impression_ts <= conversion_ts <=
// impression_ts + window; ties on the timestamp go to the later input
// record. An impression stays positive once labeled; unmatched conversions
// are counted, not errors. Every impression's line must be resolvable.
AttributionResult attribute(std::span<const ImpressionRecord> impressions,
                            std::span<const ConversionRecord> conversions,
                            const std::unordered_map<std::string, uint32_t>& line_types,
                            int64_t window_seconds);

// Keep every positive and each negative independently with probability
// keep_prob. Returns the kept subset of `indices`, in order.
std::vector<uint32_t> downsample_negatives(std::span<const uint32_t> indices, const AttributionResult& labels,
                                           double keep_prob, uint64_t seed);

// Vocabulary from the given (training) impressions: field names are the
// sorted union of keys, each field gets an OOV slot first and then its
// values with frequency >= min_freq, sorted. Absent fields count as the
// missing token.
FieldSchema build_schema(std::span<const ImpressionRecord> impressions, std::span<const uint32_t> indices,
                         uint32_t min_feature_freq);

SparseInstance encode_impression(const FieldSchema& schema, const ImpressionRecord& rec, uint32_t conv_type,
                                 uint8_t label);

struct SplitStats {
    size_t samples = 0;
    size_t positives = 0;
    size_t distinct_features = 0;
};

struct PreparedData {
    Dataset train, val, test;
    SplitStats train_stats, val_stats, test_stats;
    size_t conversions_unmatched = 0;
    size_t impressions_out_of_range = 0;
    size_t train_negatives_dropped = 0;
};

// Full dataset construction: type ids, attribution, day splits, training
// negative downsampling, vocabulary from the training split, encoding of all
// three splits with OOV fallback.
PreparedData prepare(std::span<const ImpressionRecord> impressions,
                     std::span<const ConversionRecord> conversions, std::span<const LineRecord> lines,
                     const PipelineConfig& config);

} // namespace mtfwfm
