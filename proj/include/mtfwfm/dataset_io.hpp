#pragma once

#include "mtfwfm/schema.hpp"

#include <string>

namespace mtfwfm {

// Encoded dataset on disk: a fixed-width binary instance file (one schema id,
// then per record the N active feature u32s, a type byte and a label byte,
// little-endian) plus a JSON sidecar at "<path>.schema.json" holding the
// vocabulary and type names. The sidecar carries the same schema id so a
// binary file cannot be paired with the wrong vocabulary.

void save_dataset(const Dataset& dataset, const std::string& path);

Dataset load_dataset(const std::string& path); // throws DataError

// Stable 64-bit digest of the vocabulary and type names.
uint64_t schema_id(const FieldSchema& schema, const std::vector<std::string>& type_names);

} // namespace mtfwfm
