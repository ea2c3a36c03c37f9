#include "mtfwfm/generator.hpp"

#include "mtfwfm/error.hpp"
#include "mtfwfm/model.hpp"
#include "mtfwfm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mtfwfm {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct PlantedIndexed {
    uint32_t field_p;
    uint32_t field_q;
    double effect;
};

} // namespace

void GenConfig::validate() const {
    if (num_days < 1) throw DataError("num_days must be >= 1");
    if (impressions_per_day < 1) throw DataError("impressions_per_day must be >= 1");
    if (num_users < 1) throw DataError("num_users must be >= 1");
    if (type_names.empty()) throw DataError("at least one conversion type is required");
    if (lines_per_type.size() != type_names.size() || base_rate.size() != type_names.size())
        throw DataError("lines_per_type and base_rate must match the type list");
    for (uint32_t c : lines_per_type)
        if (c < 1) throw DataError("each type needs at least one line");
    for (double r : base_rate)
        if (!(r > 0.0 && r < 1.0))
            throw DataError("base rates must lie strictly inside (0, 1); the log-odds are unbounded otherwise");
    if (fields.size() < 2) throw DataError("at least two fields are required");
    for (const auto& f : fields)
        if (f.cardinality < 1) throw DataError("field '" + f.name + "' needs cardinality >= 1");
    for (const auto& p : planted) {
        if (!std::isfinite(p.effect)) throw DataError("planted effect must be finite");
        if (std::find(type_names.begin(), type_names.end(), p.type) == type_names.end())
            throw DataError("planted pair references unknown type '" + p.type + "'");
        auto has_field = [&](const std::string& n) {
            return std::any_of(fields.begin(), fields.end(), [&](const auto& f) { return f.name == n; });
        };
        if (!has_field(p.field_p) || !has_field(p.field_q) || p.field_p == p.field_q)
            throw DataError("planted pair (" + p.field_p + ", " + p.field_q + ") does not name two distinct fields");
    }
    if (window_seconds < 0) throw DataError("window_seconds must be >= 0");
}

SyntheticLogs generate_synthetic(const GenConfig& config) {
    config.validate();
    const uint32_t num_types = static_cast<uint32_t>(config.type_names.size());

    SyntheticLogs out;
    std::vector<uint32_t> line_type; // flat line index -> type
    for (uint32_t t = 0; t < num_types; ++t) {
        for (uint32_t i = 0; i < config.lines_per_type[t]; ++i) {
            out.lines.push_back({"line_" + config.type_names[t] + "_" + std::to_string(i), config.type_names[t]});
            line_type.push_back(t);
        }
    }
    const uint32_t num_lines = static_cast<uint32_t>(line_type.size());

    // Planted pairs per type with resolved field indices.
    std::vector<std::vector<PlantedIndexed>> planted(num_types);
    auto field_index = [&](const std::string& name) {
        for (uint32_t f = 0; f < config.fields.size(); ++f)
            if (config.fields[f].name == name) return f;
        throw DataError("unknown field '" + name + "'");
    };
    for (const auto& p : config.planted) {
        const auto t = static_cast<uint32_t>(
            std::find(config.type_names.begin(), config.type_names.end(), p.type) - config.type_names.begin());
        planted[t].push_back({field_index(p.field_p), field_index(p.field_q), p.effect});
    }

    std::vector<double> base_logit(num_types);
    for (uint32_t t = 0; t < num_types; ++t)
        base_logit[t] = std::log(config.base_rate[t] / (1.0 - config.base_rate[t]));

    std::vector<uint32_t> values(config.fields.size());
    out.impressions.reserve(size_t(config.num_days) * config.impressions_per_day);
    for (uint32_t day = 0; day < config.num_days; ++day) {
        Rng rng(splitmix64(config.seed) ^ splitmix64(day));
        for (uint32_t i = 0; i < config.impressions_per_day; ++i) {
            ImpressionRecord imp;
            imp.ts = int64_t(day) * kSecondsPerDay + int64_t(rng.uniform_int(kSecondsPerDay));
            imp.user_id = "u" + std::to_string(rng.uniform_int(config.num_users));
            const uint32_t line = static_cast<uint32_t>(rng.uniform_int(num_lines));
            const uint32_t t = line_type[line];
            imp.line_id = out.lines[line].line_id;
            for (size_t f = 0; f < config.fields.size(); ++f) {
                values[f] = static_cast<uint32_t>(rng.uniform_int(config.fields[f].cardinality));
                imp.field_values[config.fields[f].name] = "v" + std::to_string(values[f]);
            }

            double logit = base_logit[t];
            for (const auto& p : planted[t])
                logit += ((values[p.field_p] + values[p.field_q]) % 2 == 0) ? p.effect : -p.effect;
            const double prob = sigmoid(logit);

            if (rng.bernoulli(prob)) {
                ConversionRecord conv;
                conv.ts = imp.ts + int64_t(rng.uniform_int(uint64_t(config.window_seconds) + 1));
                conv.user_id = imp.user_id;
                conv.line_id = imp.line_id;
                conv.conv_type = config.type_names[t];
                out.conversions.push_back(std::move(conv));
            }
            out.impressions.push_back(std::move(imp));
        }
    }
    return out;
}

} // namespace mtfwfm
