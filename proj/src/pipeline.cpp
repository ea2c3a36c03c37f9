#include "mtfwfm/pipeline.hpp"

#include "mtfwfm/error.hpp"
#include "mtfwfm/rng.hpp"

#include <algorithm>
#include <set>

namespace mtfwfm {

void PipelineConfig::validate() const {
    if (train_day_begin > train_day_end) throw DataError("train day range is empty");
    if (!(train_day_end < val_day && val_day < test_day))
        throw DataError("day splits must be ordered: train ... < val < test");
    if (window_seconds < 0) throw DataError("window_seconds must be >= 0");
    if (!(negative_keep_prob > 0.0 && negative_keep_prob <= 1.0))
        throw DataError("negative_keep_prob must be in (0, 1]");
}

std::vector<std::string> collect_type_names(std::span<const ConversionRecord> conversions,
                                            std::span<const LineRecord> lines) {
    std::set<std::string> names;
    for (const auto& c : conversions) names.insert(c.conv_type);
    for (const auto& l : lines) names.insert(l.conv_type);
    return {names.begin(), names.end()};
}

std::unordered_map<std::string, uint32_t> resolve_line_types(std::span<const ConversionRecord> conversions,
                                                             std::span<const LineRecord> lines,
                                                             const std::vector<std::string>& type_names) {
    std::unordered_map<std::string, uint32_t> type_id;
    for (uint32_t t = 0; t < type_names.size(); ++t) type_id[type_names[t]] = t;

    std::unordered_map<std::string, uint32_t> out;
    for (const auto& l : lines) {
        auto it = type_id.find(l.conv_type);
        if (it == type_id.end()) throw DataError("line '" + l.line_id + "' has unknown type '" + l.conv_type + "'");
        auto [pos, inserted] = out.emplace(l.line_id, it->second);
        if (!inserted && pos->second != it->second)
            throw DataError("line '" + l.line_id + "' is declared with two conversion types");
    }
    for (const auto& c : conversions) {
        auto it = type_id.find(c.conv_type);
        if (it == type_id.end()) throw DataError("conversion has unknown type '" + c.conv_type + "'");
        auto [pos, inserted] = out.emplace(c.line_id, it->second);
        if (!inserted && pos->second != it->second)
            throw DataError("line '" + c.line_id + "' has conversions of more than one type");
    }
    return out;
}

AttributionResult attribute(std::span<const ImpressionRecord> impressions,
                            std::span<const ConversionRecord> conversions,
                            const std::unordered_map<std::string, uint32_t>& line_types,
                            int64_t window_seconds) {
    AttributionResult out;
    out.label.assign(impressions.size(), 0);
    out.conv_type.assign(impressions.size(), 0);
    out.conversions_total = conversions.size();

    // (user, line) -> impression indices sorted by (ts, index)
    std::unordered_map<std::string, std::vector<uint32_t>> groups;
    groups.reserve(impressions.size());
    auto group_key = [](const std::string& user, const std::string& line) { return user + '\x1f' + line; };
    for (uint32_t i = 0; i < impressions.size(); ++i) {
        const auto& imp = impressions[i];
        auto it = line_types.find(imp.line_id);
        if (it == line_types.end())
            throw DataError("impression references line '" + imp.line_id + "' with no known conversion type");
        out.conv_type[i] = it->second;
        groups[group_key(imp.user_id, imp.line_id)].push_back(i);
    }
    for (auto& [key, idxs] : groups) {
        (void)key;
        std::sort(idxs.begin(), idxs.end(), [&](uint32_t a, uint32_t b) {
            if (impressions[a].ts != impressions[b].ts) return impressions[a].ts < impressions[b].ts;
            return a < b;
        });
    }

    for (const auto& conv : conversions) {
        auto git = groups.find(group_key(conv.user_id, conv.line_id));
        if (git == groups.end()) {
            ++out.conversions_unmatched;
            continue;
        }
        const auto& idxs = git->second;
        // Latest impression with ts <= conversion ts.
        auto it = std::upper_bound(idxs.begin(), idxs.end(), conv.ts,
                                   [&](int64_t ts, uint32_t idx) { return ts < impressions[idx].ts; });
        if (it == idxs.begin()) {
            ++out.conversions_unmatched;
            continue;
        }
        const uint32_t cand = *(it - 1);
        if (conv.ts - impressions[cand].ts > window_seconds) {
            ++out.conversions_unmatched;
            continue;
        }
        ++out.conversions_attributed;
        out.label[cand] = 1; // at most one positive label per impression
    }
    for (uint8_t l : out.label) out.positives += l;
    return out;
}

std::vector<uint32_t> downsample_negatives(std::span<const uint32_t> indices, const AttributionResult& labels,
                                           double keep_prob, uint64_t seed) {
    if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw DataError("keep probability must be in (0, 1]");
    std::vector<uint32_t> kept;
    kept.reserve(indices.size());
    Rng rng(seed);
    for (uint32_t i : indices) {
        if (labels.label[i]) {
            kept.push_back(i);
        } else if (keep_prob >= 1.0 || rng.bernoulli(keep_prob)) {
            kept.push_back(i);
        }
    }
    return kept;
}

FieldSchema build_schema(std::span<const ImpressionRecord> impressions, std::span<const uint32_t> indices,
                         uint32_t min_feature_freq) {
    std::set<std::string> field_name_set;
    for (uint32_t i : indices)
        for (const auto& [name, value] : impressions[i].field_values) {
            (void)value;
            field_name_set.insert(name);
        }
    if (field_name_set.empty()) throw DataError("no fields found in the training impressions");

    FieldSchema schema;
    schema.fields.assign(field_name_set.begin(), field_name_set.end());
    const size_t n = schema.fields.size();
    schema.feature_dict.resize(n);
    schema.oov_index.resize(n);

    // Value frequencies per field over the training impressions; an absent
    // field counts as the missing token.
    std::vector<std::map<std::string, uint32_t>> freq(n);
    for (uint32_t i : indices) {
        const auto& rec = impressions[i];
        for (size_t f = 0; f < n; ++f) {
            auto it = rec.field_values.find(schema.fields[f]);
            const std::string& v = it != rec.field_values.end() ? it->second : kMissingToken;
            ++freq[f][v];
        }
    }

    uint32_t next = 0;
    for (size_t f = 0; f < n; ++f) {
        schema.oov_index[f] = next;
        schema.field_of.push_back(static_cast<uint32_t>(f)); // the OOV slot
        ++next;
        for (const auto& [value, count] : freq[f]) {
            if (count < min_feature_freq) continue; // folds into OOV
            schema.feature_dict[f][value] = next;
            schema.field_of.push_back(static_cast<uint32_t>(f));
            ++next;
        }
    }
    schema.num_features = next;
    schema.validate();
    return schema;
}

SparseInstance encode_impression(const FieldSchema& schema, const ImpressionRecord& rec, uint32_t conv_type,
                                 uint8_t label) {
    SparseInstance inst;
    inst.active.resize(schema.num_fields());
    for (size_t f = 0; f < schema.num_fields(); ++f) {
        auto it = rec.field_values.find(schema.fields[f]);
        const std::string& v = it != rec.field_values.end() ? it->second : kMissingToken;
        inst.active[f] = schema.encode_value(static_cast<uint32_t>(f), v);
    }
    inst.conv_type = conv_type;
    inst.label = label;
    return inst;
}

namespace {

SplitStats stats_of(const std::vector<SparseInstance>& instances) {
    SplitStats s;
    s.samples = instances.size();
    std::set<uint32_t> features;
    for (const auto& inst : instances) {
        s.positives += inst.label ? 1 : 0;
        features.insert(inst.active.begin(), inst.active.end());
    }
    s.distinct_features = features.size();
    return s;
}

} // namespace

PreparedData prepare(std::span<const ImpressionRecord> impressions,
                     std::span<const ConversionRecord> conversions, std::span<const LineRecord> lines,
                     const PipelineConfig& config) {
    config.validate();
    const auto type_names = collect_type_names(conversions, lines);
    if (type_names.empty()) throw DataError("no conversion types found");
    if (type_names.size() > 255) throw DataError("too many conversion types");
    const auto line_types = resolve_line_types(conversions, lines, type_names);

    const AttributionResult attr = attribute(impressions, conversions, line_types, config.window_seconds);

    PreparedData out;
    out.conversions_unmatched = attr.conversions_unmatched;

    std::vector<uint32_t> train_idx, val_idx, test_idx;
    for (uint32_t i = 0; i < impressions.size(); ++i) {
        const int64_t day = impressions[i].ts / kSecondsPerDay;
        if (day >= config.train_day_begin && day <= config.train_day_end) {
            train_idx.push_back(i);
        } else if (day == config.val_day) {
            val_idx.push_back(i);
        } else if (day == config.test_day) {
            test_idx.push_back(i);
        } else {
            ++out.impressions_out_of_range;
        }
    }
    if (train_idx.empty()) throw DataError("no impressions in the training day range");

    // Downsampling applies to the training split only; evaluation splits keep
    // the real class distribution.
    const size_t before = train_idx.size();
    train_idx = downsample_negatives(train_idx, attr, config.negative_keep_prob, config.seed);
    out.train_negatives_dropped = before - train_idx.size();

    const FieldSchema schema = build_schema(impressions, train_idx, config.min_feature_freq);

    auto encode_split = [&](const std::vector<uint32_t>& idxs, Dataset& ds) {
        ds.schema = schema;
        ds.type_names = type_names;
        ds.instances.reserve(idxs.size());
        for (uint32_t i : idxs)
            ds.instances.push_back(encode_impression(schema, impressions[i], attr.conv_type[i], attr.label[i]));
    };
    encode_split(train_idx, out.train);
    encode_split(val_idx, out.val);
    encode_split(test_idx, out.test);
    out.train_stats = stats_of(out.train.instances);
    out.val_stats = stats_of(out.val.instances);
    out.test_stats = stats_of(out.test.instances);
    return out;
}

} // namespace mtfwfm
