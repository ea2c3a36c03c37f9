#pragma once

#include "mtfwfm/model.hpp"
#include "mtfwfm/schema.hpp"

#include <string>
#include <vector>

namespace mtfwfm {

inline constexpr const char* kModelFormatTag = "mtfwfm-v1";

// Field names and per-field cardinalities of the vocabulary the model was
// trained against, stored so evaluation can reject mismatched datasets.
struct FieldDigest {
    std::string name;
    uint32_t cardinality = 0;

    bool operator==(const FieldDigest&) const = default;
};

std::vector<FieldDigest> schema_digest(const FieldSchema& schema);

// Single binary document: format tag, model config, field digest, then all
// parameter tensors row-major as little-endian IEEE doubles. Round-trips
// bit-exactly.
void save_model(const ModelParams& params, const std::vector<FieldDigest>& digest, const std::string& path);

struct LoadedModel {
    ModelParams params;
    std::vector<FieldDigest> digest;
};

LoadedModel load_model(const std::string& path); // throws DataError

// Throws DataError if `schema` does not match the digest the model carries.
void check_schema_digest(const std::vector<FieldDigest>& digest, const FieldSchema& schema);

} // namespace mtfwfm
