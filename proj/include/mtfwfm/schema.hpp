#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtfwfm {

// Vocabulary of a multi-field categorical dataset. Feature indices are dense
// in [0, num_features) and laid out in field blocks: field 0's features come
// first (its OOV slot leading), then field 1's, and so on. Every field owns
// at least its OOV slot.
struct FieldSchema {
    std::vector<std::string> fields;                                         // field names, size N
    std::vector<std::unordered_map<std::string, uint32_t>> feature_dict;     // per field: raw value -> feature index
    std::vector<uint32_t> field_of;                                          // feature index -> field index
    std::vector<uint32_t> oov_index;                                         // per field
    uint32_t num_features = 0;

    size_t num_fields() const { return fields.size(); }

    // Features owned by a field, including its OOV slot.
    uint32_t cardinality(uint32_t field) const;

    // Dictionary lookup with OOV fallback.
    uint32_t encode_value(uint32_t field, const std::string& raw) const;

    // Throws DataError unless the schema invariants hold: dense indices,
    // every feature in exactly one field, every field non-empty.
    void validate() const;
};

// One training/evaluation sample: exactly one active feature per field, in
// field order, plus its conversion type and binary label.
struct SparseInstance {
    std::vector<uint32_t> active;  // size N, active[f] belongs to field f
    uint32_t conv_type = 0;
    uint8_t label = 0;
    double weight = 1.0;
};

// Throws DataError if the instance is not field-aligned with the schema.
void validate_instance(const FieldSchema& schema, const SparseInstance& inst);

// Encoded dataset plus the vocabulary it was encoded with.
struct Dataset {
    FieldSchema schema;
    std::vector<std::string> type_names;
    std::vector<SparseInstance> instances;

    size_t num_types() const { return type_names.size(); }
};

} // namespace mtfwfm
