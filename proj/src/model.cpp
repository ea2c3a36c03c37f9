#include "mtfwfm/model.hpp"

#include "mtfwfm/error.hpp"
#include "mtfwfm/kernels.hpp"

#include <cmath>

namespace mtfwfm {

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::fm_ctf2: return "fm-ctf2";
        case ModelKind::fwfm_ctf2: return "fwfm-ctf2";
        case ModelKind::mt_fwfm: return "mt-fwfm";
        case ModelKind::fwfm_ctf3: return "fwfm-ctf3";
    }
    return "unknown";
}

ModelKind model_kind_from_name(const std::string& name) {
    if (name == "fm-ctf2") return ModelKind::fm_ctf2;
    if (name == "fwfm-ctf2") return ModelKind::fwfm_ctf2;
    if (name == "mt-fwfm") return ModelKind::mt_fwfm;
    if (name == "fwfm-ctf3") return ModelKind::fwfm_ctf3;
    throw DataError("unknown model kind '" + name + "'");
}

void ModelConfig::validate() const {
    if (embed_dim < 1) throw DataError("embed_dim must be >= 1");
    if (num_types < 1) throw DataError("num_types must be >= 1");
    if (num_types > 255) throw DataError("num_types must fit in a byte");
    if (num_fields < 2) throw DataError("num_fields must be >= 2");
    if (num_features < num_fields)
        throw DataError("num_features must cover at least one feature per field");
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
    config.validate();
    ModelParams p;
    p.config = config;
    p.bias.assign(config.task_count(), 0.0);
    p.embeddings.assign(size_t(config.total_features()) * config.embed_dim, 0.0);
    p.main_weights.assign(size_t(config.task_count()) * config.total_fields() * config.embed_dim, 0.0);
    if (config.has_pair_weights())
        p.pair_weights.assign(size_t(config.task_count()) * config.pair_count(), 0.0);
    return p;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace detail {

uint32_t gather_active(const ModelConfig& config, const SparseInstance& inst, uint32_t* out) {
    if (inst.active.size() != config.num_fields)
        throw DataError("instance has " + std::to_string(inst.active.size()) + " active features, model expects " +
                        std::to_string(config.num_fields));
    if (inst.conv_type >= config.num_types)
        throw DataError("conversion type " + std::to_string(inst.conv_type) + " out of range [0, " +
                        std::to_string(config.num_types) + ")");
    for (uint32_t f = 0; f < config.num_fields; ++f) {
        if (inst.active[f] >= config.num_features)
            throw DataError("feature index " + std::to_string(inst.active[f]) + " out of range [0, " +
                            std::to_string(config.num_features) + ")");
        out[f] = inst.active[f];
    }
    if (config.is_ctf()) out[config.num_fields] = config.num_features + inst.conv_type;
    return config.total_fields();
}

} // namespace detail

namespace {

// Shared forward pass. All kinds accumulate main terms in field order and
// pair terms in (p, q) lexicographic order, so reductions between kinds
// (r == 1, T == 1, zeroed type-field parameters) hold exactly.
double phi_impl(const ModelParams& P, const SparseInstance& inst) {
    const ModelConfig& cfg = P.config;
    const auto& ops = kernels::active();
    const uint32_t K = cfg.embed_dim;

    uint32_t active[256];
    if (cfg.total_fields() > 256) throw DataError("too many fields");
    const uint32_t F = detail::gather_active(cfg, inst, active);
    const uint32_t task = cfg.kind == ModelKind::mt_fwfm ? inst.conv_type : 0;

    double main_sum = 0.0;
    for (uint32_t f = 0; f < F; ++f)
        main_sum += ops.dot(P.embedding(active[f]), P.main_weight(task, f), K);

    double pair_sum = 0.0;
    for (uint32_t p = 0; p + 1 < F; ++p) {
        const double* vp = P.embedding(active[p]);
        for (uint32_t q = p + 1; q < F; ++q)
            pair_sum += ops.dot(vp, P.embedding(active[q]), K) * P.pair_weight_value(task, p, q);
    }

    double phi = P.bias[task] + main_sum + pair_sum;

    if (cfg.kind == ModelKind::fwfm_ctf3) {
        // Products of two base-field embeddings with the type embedding,
        // reusing the base-field pair weights.
        const double* vt = P.embedding(active[cfg.num_fields]);
        double triple_sum = 0.0;
        for (uint32_t p = 0; p + 1 < cfg.num_fields; ++p) {
            const double* vp = P.embedding(active[p]);
            for (uint32_t q = p + 1; q < cfg.num_fields; ++q)
                triple_sum += ops.dot3(vp, P.embedding(active[q]), vt, K) * P.pair_weight_value(0, p, q);
        }
        phi += triple_sum;
    }
    return phi;
}

} // namespace

double phi_fwfm(const ModelParams& params, const SparseInstance& inst) {
    if (params.config.kind != ModelKind::fm_ctf2 && params.config.kind != ModelKind::fwfm_ctf2)
        throw DataError("phi_fwfm called with model kind " + std::string(model_kind_name(params.config.kind)));
    return phi_impl(params, inst);
}

double phi_mt_fwfm(const ModelParams& params, const SparseInstance& inst) {
    if (params.config.kind != ModelKind::mt_fwfm)
        throw DataError("phi_mt_fwfm called with model kind " + std::string(model_kind_name(params.config.kind)));
    return phi_impl(params, inst);
}

double phi_3way_ctf(const ModelParams& params, const SparseInstance& inst) {
    if (params.config.kind != ModelKind::fwfm_ctf3)
        throw DataError("phi_3way_ctf called with model kind " + std::string(model_kind_name(params.config.kind)));
    return phi_impl(params, inst);
}

double phi_score(const ModelParams& params, const SparseInstance& inst) {
    return phi_impl(params, inst);
}

Prediction predict(const ModelParams& params, const SparseInstance& inst) {
    Prediction out;
    out.phi = phi_impl(params, inst);
    double p = sigmoid(out.phi);
    if (p < kProbEps) p = kProbEps;
    if (p > 1.0 - kProbEps) p = 1.0 - kProbEps;
    out.prob = p;
    return out;
}

} // namespace mtfwfm
