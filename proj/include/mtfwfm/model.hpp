#pragma once

#include "mtfwfm/schema.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mtfwfm {

// The four scoring models. The CTF kinds fold the conversion type into the
// input as an extra field appended after the base fields; the multi-task kind
// keeps per-type output parameters over the base fields instead.
enum class ModelKind : uint32_t {
    fm_ctf2 = 0,    // 2-way FM, type-as-field, pair weights fixed at 1
    fwfm_ctf2 = 1,  // 2-way FwFM, type-as-field
    mt_fwfm = 2,    // multi-task FwFM, shared embeddings, per-type outputs
    fwfm_ctf3 = 3,  // FwFM with type-as-field plus 3-way embedding products
};

const char* model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name); // throws DataError

struct ModelConfig {
    ModelKind kind = ModelKind::mt_fwfm;
    uint32_t num_fields = 0;    // N, base fields (excluding any type field)
    uint32_t num_features = 0;  // M, base features
    uint32_t num_types = 0;     // T
    uint32_t embed_dim = 0;     // K

    bool is_ctf() const { return kind != ModelKind::mt_fwfm; }
    bool has_pair_weights() const { return kind != ModelKind::fm_ctf2; }
    // CTF kinds are single-task models; only mt_fwfm keeps T parameter sets.
    uint32_t task_count() const { return kind == ModelKind::mt_fwfm ? num_types : 1; }
    uint32_t total_fields() const { return is_ctf() ? num_fields + 1 : num_fields; }
    uint32_t total_features() const { return is_ctf() ? num_features + num_types : num_features; }
    uint32_t pair_count() const { return total_fields() * (total_fields() - 1) / 2; }

    void validate() const; // throws DataError
};

// Packed index of the unordered field pair {p, q}, p != q, within the strict
// upper triangle of an F x F matrix. The diagonal is not stored: one active
// feature per field means same-field pairs never occur.
inline uint32_t pair_index(uint32_t p, uint32_t q, uint32_t num_fields) {
    if (p > q) { uint32_t t = p; p = q; q = t; }
    return p * num_fields - p * (p + 1) / 2 + (q - p - 1);
}

// All learnable parameters of one model. Tensors are dense row-major; the
// per-type pair weights are packed upper triangles, so every stored scalar is
// a free parameter.
struct ModelParams {
    ModelConfig config;
    std::vector<double> bias;          // [task]
    std::vector<double> embeddings;    // [total_features x K]
    std::vector<double> main_weights;  // [task x total_fields x K]
    std::vector<double> pair_weights;  // [task x pair_count], absent for fm_ctf2

    double* embedding(uint32_t feature) { return embeddings.data() + size_t(feature) * config.embed_dim; }
    const double* embedding(uint32_t feature) const { return embeddings.data() + size_t(feature) * config.embed_dim; }

    double* main_weight(uint32_t task, uint32_t field) {
        return main_weights.data() + (size_t(task) * config.total_fields() + field) * config.embed_dim;
    }
    const double* main_weight(uint32_t task, uint32_t field) const {
        return main_weights.data() + (size_t(task) * config.total_fields() + field) * config.embed_dim;
    }

    double& pair_weight(uint32_t task, uint32_t p, uint32_t q) {
        return pair_weights[size_t(task) * config.pair_count() + pair_index(p, q, config.total_fields())];
    }
    // Pair weight as used by the forward pass: fixed 1 for the FM kind.
    double pair_weight_value(uint32_t task, uint32_t p, uint32_t q) const {
        if (!config.has_pair_weights()) return 1.0;
        return pair_weights[size_t(task) * config.pair_count() + pair_index(p, q, config.total_fields())];
    }

    // Number of allocated parameter scalars.
    size_t scalar_count() const {
        return bias.size() + embeddings.size() + main_weights.size() + pair_weights.size();
    }

    static ModelParams zeros(const ModelConfig& config);
};

struct Prediction {
    double phi = 0.0;
    double prob = 0.5;
};

// Numerically stable logistic function.
double sigmoid(double x);

// Probability floor/ceiling applied before taking logs.
inline constexpr double kProbEps = 1e-15;

// Forward scores. Each checks the instance against the model shape and the
// declared kind; see phi_score for the kind dispatch.
double phi_fwfm(const ModelParams& params, const SparseInstance& inst);     // fm_ctf2 / fwfm_ctf2
double phi_mt_fwfm(const ModelParams& params, const SparseInstance& inst);  // mt_fwfm
double phi_3way_ctf(const ModelParams& params, const SparseInstance& inst); // fwfm_ctf3
double phi_score(const ModelParams& params, const SparseInstance& inst);    // any kind

Prediction predict(const ModelParams& params, const SparseInstance& inst);

namespace detail {
// Active feature list for a forward pass: the instance's base features plus,
// for CTF kinds, the conversion-type feature in the appended field slot.
// Returns the number of entries written (total_fields). `out` must hold
// total_fields entries.
uint32_t gather_active(const ModelConfig& config, const SparseInstance& inst, uint32_t* out);
} // namespace detail

} // namespace mtfwfm
