#include "mtfwfm/schema.hpp"

#include "mtfwfm/error.hpp"

#include <vector>

namespace mtfwfm {

uint32_t FieldSchema::cardinality(uint32_t field) const {
    uint32_t n = 0;
    for (uint32_t f : field_of)
        if (f == field) ++n;
    return n;
}

uint32_t FieldSchema::encode_value(uint32_t field, const std::string& raw) const {
    const auto& dict = feature_dict.at(field);
    auto it = dict.find(raw);
    return it != dict.end() ? it->second : oov_index.at(field);
}

void FieldSchema::validate() const {
    const size_t n = fields.size();
    if (n == 0) throw DataError("schema has no fields");
    if (feature_dict.size() != n || oov_index.size() != n)
        throw DataError("schema arrays disagree on field count");
    if (field_of.size() != num_features)
        throw DataError("field_of size does not match num_features");
    std::vector<uint32_t> per_field(n, 0);
    for (uint32_t i = 0; i < num_features; ++i) {
        if (field_of[i] >= n) throw DataError("feature " + std::to_string(i) + " maps to unknown field");
        ++per_field[field_of[i]];
    }
    for (size_t f = 0; f < n; ++f) {
        if (per_field[f] == 0)
            throw DataError("field '" + fields[f] + "' owns no features");
        if (oov_index[f] >= num_features || field_of[oov_index[f]] != f)
            throw DataError("field '" + fields[f] + "' has an invalid OOV index");
        for (const auto& [raw, idx] : feature_dict[f]) {
            if (idx >= num_features || field_of[idx] != f)
                throw DataError("feature '" + raw + "' is indexed outside field '" + fields[f] + "'");
        }
    }
}

void validate_instance(const FieldSchema& schema, const SparseInstance& inst) {
    if (inst.active.size() != schema.num_fields())
        throw DataError("instance has " + std::to_string(inst.active.size()) + " active features, schema has " +
                        std::to_string(schema.num_fields()) + " fields");
    for (size_t f = 0; f < inst.active.size(); ++f) {
        uint32_t idx = inst.active[f];
        if (idx >= schema.num_features)
            throw DataError("active feature " + std::to_string(idx) + " out of range");
        if (schema.field_of[idx] != f)
            throw DataError("active feature " + std::to_string(idx) + " belongs to field " +
                            std::to_string(schema.field_of[idx]) + ", expected field " + std::to_string(f));
    }
}

} // namespace mtfwfm
