#pragma once

#include "mtfwfm/error.hpp"
#include "mtfwfm/model.hpp"

namespace mtfwfm {

// Reference forward pass templated on the scalar type. With S = double this
// is the plain scalar evaluation; with S = CountingScalar it meters floating
// adds and multiplies. The loop shapes are deliberate: a length-K dot product
// is K multiplies and K-1 adds, a sum of n terms is n-1 adds, and every pair
// term spends one extra multiply on its field-pair weight.

template <class S>
S dot_ref(const double* a, const double* b, uint32_t k) {
    S acc = S(a[0]) * S(b[0]);
    for (uint32_t i = 1; i < k; ++i) acc = acc + S(a[i]) * S(b[i]);
    return acc;
}

template <class S>
S dot3_ref(const double* a, const double* b, const double* c, uint32_t k) {
    S acc = S(a[0]) * S(b[0]) * S(c[0]);
    for (uint32_t i = 1; i < k; ++i) acc = acc + S(a[i]) * S(b[i]) * S(c[i]);
    return acc;
}

// Sum over fields of <v_active, w_field>.
template <class S>
S main_term_ref(const ModelParams& P, uint32_t task, const uint32_t* active, uint32_t num_fields) {
    const uint32_t k = P.config.embed_dim;
    S sum = dot_ref<S>(P.embedding(active[0]), P.main_weight(task, 0), k);
    for (uint32_t f = 1; f < num_fields; ++f)
        sum = sum + dot_ref<S>(P.embedding(active[f]), P.main_weight(task, f), k);
    return sum;
}

// Sum over field pairs of <v_p, v_q> * r_pq.
template <class S>
S pair_term_ref(const ModelParams& P, uint32_t task, const uint32_t* active, uint32_t num_fields) {
    const uint32_t k = P.config.embed_dim;
    S sum = dot_ref<S>(P.embedding(active[0]), P.embedding(active[1]), k) * S(P.pair_weight_value(task, 0, 1));
    for (uint32_t p = 0; p + 1 < num_fields; ++p)
        for (uint32_t q = p + 1; q < num_fields; ++q) {
            if (p == 0 && q == 1) continue;
            sum = sum + dot_ref<S>(P.embedding(active[p]), P.embedding(active[q]), k) *
                            S(P.pair_weight_value(task, p, q));
        }
    return sum;
}

// Sum over base-field pairs of <v_p, v_q, v_type> * r_pq.
template <class S>
S triple_term_ref(const ModelParams& P, const uint32_t* active, uint32_t num_base_fields, const double* vt) {
    const uint32_t k = P.config.embed_dim;
    S sum = dot3_ref<S>(P.embedding(active[0]), P.embedding(active[1]), vt, k) * S(P.pair_weight_value(0, 0, 1));
    for (uint32_t p = 0; p + 1 < num_base_fields; ++p)
        for (uint32_t q = p + 1; q < num_base_fields; ++q) {
            if (p == 0 && q == 1) continue;
            sum = sum + dot3_ref<S>(P.embedding(active[p]), P.embedding(active[q]), vt, k) *
                            S(P.pair_weight_value(0, p, q));
        }
    return sum;
}

template <class S>
S phi_reference(const ModelParams& P, const SparseInstance& inst) {
    const ModelConfig& cfg = P.config;
    uint32_t active[256];
    if (cfg.total_fields() > 256) throw DataError("too many fields");
    const uint32_t F = detail::gather_active(cfg, inst, active);
    const uint32_t task = cfg.kind == ModelKind::mt_fwfm ? inst.conv_type : 0;

    S phi = S(P.bias[task]) + main_term_ref<S>(P, task, active, F) + pair_term_ref<S>(P, task, active, F);
    if (cfg.kind == ModelKind::fwfm_ctf3)
        phi = phi + triple_term_ref<S>(P, active, cfg.num_fields, P.embedding(active[cfg.num_fields]));
    return phi;
}

} // namespace mtfwfm
