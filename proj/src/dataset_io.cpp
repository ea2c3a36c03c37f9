#include "mtfwfm/dataset_io.hpp"

#include "mtfwfm/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <map>

namespace mtfwfm {

namespace {

using nlohmann::json;

constexpr char kDatasetMagic[8] = {'M', 'T', 'F', 'W', 'F', 'M', 'D', '1'};

uint64_t fnv1a(const std::string& s, uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

uint64_t schema_id(const FieldSchema& schema, const std::vector<std::string>& type_names) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (size_t f = 0; f < schema.num_fields(); ++f) {
        h = fnv1a(schema.fields[f], h);
        // Map order must not matter.
        std::map<std::string, uint32_t> sorted(schema.feature_dict[f].begin(), schema.feature_dict[f].end());
        for (const auto& [value, idx] : sorted) {
            h = fnv1a(value, h);
            h = fnv1a(std::to_string(idx), h);
        }
        h = fnv1a(std::to_string(schema.oov_index[f]), h);
    }
    for (const auto& t : type_names) h = fnv1a(t, h);
    h = fnv1a(std::to_string(schema.num_features), h);
    return h;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    dataset.schema.validate();
    const uint32_t n = static_cast<uint32_t>(dataset.schema.num_fields());
    const uint64_t sid = schema_id(dataset.schema, dataset.type_names);

    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot open '" + path + "' for writing");
        os.write(kDatasetMagic, sizeof kDatasetMagic);
        os.write(reinterpret_cast<const char*>(&sid), 8);
        os.write(reinterpret_cast<const char*>(&n), 4);
        const uint64_t count = dataset.instances.size();
        os.write(reinterpret_cast<const char*>(&count), 8);
        for (const auto& inst : dataset.instances) {
            if (inst.active.size() != n) throw DataError("instance does not match schema field count");
            os.write(reinterpret_cast<const char*>(inst.active.data()), std::streamsize(4) * n);
            const uint8_t t = static_cast<uint8_t>(inst.conv_type);
            os.write(reinterpret_cast<const char*>(&t), 1);
            os.write(reinterpret_cast<const char*>(&inst.label), 1);
        }
        if (!os) throw DataError("write to '" + path + "' failed");
    }

    json sidecar;
    sidecar["format"] = "mtfwfm-v1";
    sidecar["schema_id"] = sid;
    sidecar["num_features"] = dataset.schema.num_features;
    sidecar["types"] = dataset.type_names;
    sidecar["fields"] = json::array();
    for (size_t f = 0; f < dataset.schema.num_fields(); ++f) {
        json jf;
        jf["name"] = dataset.schema.fields[f];
        jf["oov"] = dataset.schema.oov_index[f];
        jf["features"] = json::object();
        for (const auto& [value, idx] : dataset.schema.feature_dict[f]) jf["features"][value] = idx;
        sidecar["fields"].push_back(std::move(jf));
    }
    std::ofstream os(path + ".schema.json", std::ios::trunc);
    if (!os) throw DataError("cannot open '" + path + ".schema.json' for writing");
    os << sidecar.dump(2) << "\n";
    if (!os) throw DataError("write to '" + path + ".schema.json' failed");
}

Dataset load_dataset(const std::string& path) {
    Dataset out;
    {
        std::ifstream is(path + ".schema.json");
        if (!is) throw DataError("cannot open '" + path + ".schema.json'");
        json sidecar = json::parse(is, nullptr, false);
        if (sidecar.is_discarded()) throw DataError("'" + path + ".schema.json' is not valid JSON");
        if (sidecar.value("format", "") != std::string("mtfwfm-v1"))
            throw DataError("'" + path + ".schema.json' has an unknown format tag");
        out.type_names = sidecar.at("types").get<std::vector<std::string>>();
        out.schema.num_features = sidecar.at("num_features").get<uint32_t>();
        out.schema.field_of.assign(out.schema.num_features, 0);
        for (const auto& jf : sidecar.at("fields")) {
            const auto f = static_cast<uint32_t>(out.schema.fields.size());
            out.schema.fields.push_back(jf.at("name").get<std::string>());
            out.schema.oov_index.push_back(jf.at("oov").get<uint32_t>());
            out.schema.feature_dict.emplace_back();
            auto& dict = out.schema.feature_dict.back();
            for (const auto& [value, idx] : jf.at("features").items()) {
                const auto i = idx.get<uint32_t>();
                if (i >= out.schema.num_features) throw DataError("sidecar feature index out of range");
                dict[value] = i;
                out.schema.field_of[i] = f;
            }
            if (out.schema.oov_index.back() >= out.schema.num_features)
                throw DataError("sidecar OOV index out of range");
            out.schema.field_of[out.schema.oov_index.back()] = f;
        }
        out.schema.validate();
        const uint64_t expect = schema_id(out.schema, out.type_names);
        if (sidecar.at("schema_id").get<uint64_t>() != expect)
            throw DataError("'" + path + ".schema.json' schema id does not match its contents");
    }

    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path + "'");
    char magic[8];
    if (!is.read(magic, 8) || std::string_view(magic, 8) != std::string_view(kDatasetMagic, 8))
        throw DataError("'" + path + "' is not a dataset file");
    uint64_t sid = 0, count = 0;
    uint32_t n = 0;
    if (!is.read(reinterpret_cast<char*>(&sid), 8) || !is.read(reinterpret_cast<char*>(&n), 4) ||
        !is.read(reinterpret_cast<char*>(&count), 8))
        throw DataError("'" + path + "' is truncated");
    if (sid != schema_id(out.schema, out.type_names))
        throw DataError("'" + path + "' does not match its sidecar schema");
    if (n != out.schema.num_fields()) throw DataError("'" + path + "' field count does not match sidecar");

    out.instances.resize(count);
    for (auto& inst : out.instances) {
        inst.active.resize(n);
        uint8_t t = 0;
        if (!is.read(reinterpret_cast<char*>(inst.active.data()), std::streamsize(4) * n) ||
            !is.read(reinterpret_cast<char*>(&t), 1) || !is.read(reinterpret_cast<char*>(&inst.label), 1))
            throw DataError("'" + path + "' is truncated");
        inst.conv_type = t;
        if (t >= out.type_names.size()) throw DataError("'" + path + "' has a type byte out of range");
        if (inst.label > 1) throw DataError("'" + path + "' has a non-binary label");
        validate_instance(out.schema, inst);
    }
    return out;
}

} // namespace mtfwfm
