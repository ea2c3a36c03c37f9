#include "mtfwfm/model_io.hpp"

#include "mtfwfm/error.hpp"

#include <cstring>
#include <fstream>

namespace mtfwfm {

namespace {

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_tensor(std::ostream& os, const std::vector<double>& t) {
    put_u64(os, t.size());
    os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
}

uint32_t get_u32(std::istream& is) {
    uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw DataError("model file truncated");
    return v;
}

uint64_t get_u64(std::istream& is) {
    uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw DataError("model file truncated");
    return v;
}

std::string get_string(std::istream& is) {
    uint32_t n = get_u32(is);
    if (n > (1u << 20)) throw DataError("model file corrupt: oversized string");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw DataError("model file truncated");
    return s;
}

void get_tensor(std::istream& is, std::vector<double>& t, size_t expected) {
    uint64_t n = get_u64(is);
    if (n != expected)
        throw DataError("model file corrupt: tensor has " + std::to_string(n) + " entries, expected " +
                        std::to_string(expected));
    t.resize(n);
    if (n && !is.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw DataError("model file truncated");
}

} // namespace

std::vector<FieldDigest> schema_digest(const FieldSchema& schema) {
    std::vector<FieldDigest> out;
    out.reserve(schema.num_fields());
    std::vector<uint32_t> counts(schema.num_fields(), 0);
    for (uint32_t f : schema.field_of) ++counts[f];
    for (size_t f = 0; f < schema.num_fields(); ++f)
        out.push_back({schema.fields[f], counts[f]});
    return out;
}

void save_model(const ModelParams& params, const std::vector<FieldDigest>& digest, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path + "' for writing");

    put_string(os, kModelFormatTag);
    const ModelConfig& c = params.config;
    put_u32(os, static_cast<uint32_t>(c.kind));
    put_u32(os, c.num_fields);
    put_u32(os, c.num_features);
    put_u32(os, c.num_types);
    put_u32(os, c.embed_dim);

    put_u32(os, static_cast<uint32_t>(digest.size()));
    for (const auto& d : digest) {
        put_string(os, d.name);
        put_u32(os, d.cardinality);
    }

    put_tensor(os, params.bias);
    put_tensor(os, params.embeddings);
    put_tensor(os, params.main_weights);
    put_tensor(os, params.pair_weights);
    if (!os) throw DataError("write to '" + path + "' failed");
}

LoadedModel load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open model file '" + path + "'");

    const std::string tag = get_string(is);
    if (tag != kModelFormatTag)
        throw DataError("'" + path + "' is not a " + kModelFormatTag + " model file (tag '" + tag + "')");

    ModelConfig cfg;
    uint32_t kind = get_u32(is);
    if (kind > 3) throw DataError("model file corrupt: unknown kind " + std::to_string(kind));
    cfg.kind = static_cast<ModelKind>(kind);
    cfg.num_fields = get_u32(is);
    cfg.num_features = get_u32(is);
    cfg.num_types = get_u32(is);
    cfg.embed_dim = get_u32(is);
    cfg.validate();

    LoadedModel out;
    uint32_t nd = get_u32(is);
    out.digest.resize(nd);
    for (auto& d : out.digest) {
        d.name = get_string(is);
        d.cardinality = get_u32(is);
    }

    out.params.config = cfg;
    get_tensor(is, out.params.bias, cfg.task_count());
    get_tensor(is, out.params.embeddings, size_t(cfg.total_features()) * cfg.embed_dim);
    get_tensor(is, out.params.main_weights, size_t(cfg.task_count()) * cfg.total_fields() * cfg.embed_dim);
    get_tensor(is, out.params.pair_weights,
               cfg.has_pair_weights() ? size_t(cfg.task_count()) * cfg.pair_count() : 0);
    return out;
}

void check_schema_digest(const std::vector<FieldDigest>& digest, const FieldSchema& schema) {
    const auto actual = schema_digest(schema);
    if (actual.size() != digest.size())
        throw DataError("dataset has " + std::to_string(actual.size()) + " fields, model was trained with " +
                        std::to_string(digest.size()));
    for (size_t f = 0; f < digest.size(); ++f) {
        if (actual[f] != digest[f])
            throw DataError("field " + std::to_string(f) + " mismatch: dataset has '" + actual[f].name + "' (" +
                            std::to_string(actual[f].cardinality) + " features), model expects '" + digest[f].name +
                            "' (" + std::to_string(digest[f].cardinality) + ")");
    }
}

} // namespace mtfwfm
