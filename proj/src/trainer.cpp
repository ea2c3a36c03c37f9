#include "mtfwfm/trainer.hpp"

#include "mtfwfm/error.hpp"
#include "mtfwfm/kernels.hpp"
#include "mtfwfm/metrics.hpp"
#include "mtfwfm/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

namespace mtfwfm {

RegKind reg_kind_from_name(const std::string& name) {
    if (name == "l2-all" || name == "l2_all") return RegKind::l2_all;
    if (name == "l2-embed" || name == "l2_embed_only") return RegKind::l2_embed_only;
    if (name == "none") return RegKind::none;
    throw DataError("unknown regularization kind '" + name + "'");
}

const char* reg_kind_name(RegKind kind) {
    switch (kind) {
        case RegKind::l2_all: return "l2-all";
        case RegKind::l2_embed_only: return "l2-embed";
        case RegKind::none: return "none";
    }
    return "unknown";
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw DataError("learning_rate must be > 0");
    if (reg_lambda < 0.0) throw DataError("reg_lambda must be >= 0");
    if (batch_size < 1) throw DataError("batch_size must be >= 1");
    if (max_epochs < 1) throw DataError("max_epochs must be >= 1");
    if (!(init_scale >= 0.0)) throw DataError("init_scale must be >= 0");
}

GradientBuffer::GradientBuffer(const ModelConfig& config) : config_(config) {
    config_.validate();
    bias_.assign(config_.task_count(), 0.0);
    emb_.assign(size_t(config_.total_features()) * config_.embed_dim, 0.0);
    main_.assign(size_t(config_.task_count()) * config_.total_fields() * config_.embed_dim, 0.0);
    if (config_.has_pair_weights())
        pairs_.assign(size_t(config_.task_count()) * config_.pair_count(), 0.0);
    task_touched_.assign(config_.task_count(), 0);
    feature_touched_.assign(config_.total_features(), 0);
}

void GradientBuffer::touch_task(uint32_t task) { task_touched_[task] = 1; }

void GradientBuffer::touch_feature(uint32_t feature) {
    if (!feature_touched_[feature]) {
        feature_touched_[feature] = 1;
        touched_feature_list_.push_back(feature);
    }
}

std::span<const double> GradientBuffer::main_slab(uint32_t task) const {
    const size_t stride = size_t(config_.total_fields()) * config_.embed_dim;
    return {main_.data() + task * stride, stride};
}

std::span<const double> GradientBuffer::pair_slab(uint32_t task) const {
    const size_t stride = config_.pair_count();
    return {pairs_.data() + task * stride, stride};
}

void GradientBuffer::clear() {
    const size_t main_stride = size_t(config_.total_fields()) * config_.embed_dim;
    const size_t pair_stride = config_.pair_count();
    for (uint32_t t = 0; t < config_.task_count(); ++t) {
        if (!task_touched_[t]) continue;
        bias_[t] = 0.0;
        std::fill_n(main_.data() + t * main_stride, main_stride, 0.0);
        if (!pairs_.empty()) std::fill_n(pairs_.data() + t * pair_stride, pair_stride, 0.0);
        task_touched_[t] = 0;
    }
    for (uint32_t f : touched_feature_list_) {
        std::fill_n(emb_.data() + size_t(f) * config_.embed_dim, config_.embed_dim, 0.0);
        feature_touched_[f] = 0;
    }
    touched_feature_list_.clear();
}

void GradientBuffer::merge(const GradientBuffer& other) {
    const auto& ops = kernels::active();
    const size_t main_stride = size_t(config_.total_fields()) * config_.embed_dim;
    const size_t pair_stride = config_.pair_count();
    for (uint32_t t = 0; t < config_.task_count(); ++t) {
        if (!other.task_touched_[t]) continue;
        touch_task(t);
        bias_[t] += other.bias_[t];
        ops.axpy(1.0, other.main_.data() + t * main_stride, main_.data() + t * main_stride, main_stride);
        if (!pairs_.empty())
            ops.axpy(1.0, other.pairs_.data() + t * pair_stride, pairs_.data() + t * pair_stride, pair_stride);
    }
    for (uint32_t f : other.touched_feature_list_) {
        touch_feature(f);
        ops.axpy(1.0, other.embedding(f), embedding(f), config_.embed_dim);
    }
}

ModelParams init_params(const ModelConfig& mconfig, const TrainConfig& tconfig) {
    tconfig.validate();
    ModelParams p = ModelParams::zeros(mconfig);
    Rng rng(tconfig.seed);
    const double s = tconfig.init_scale;
    for (double& v : p.embeddings) v = rng.uniform(-s, s);
    for (double& v : p.main_weights) v = rng.uniform(-s, s);
    // biases and pair weights start at zero (pair weights stay 1 for the FM
    // kind, which allocates none)
    return p;
}

namespace {

struct Workspace {
    std::vector<uint32_t> active;
    std::vector<double> pair_dots;
    std::vector<double> triple_dots;

    explicit Workspace(const ModelConfig& cfg)
        : active(cfg.total_fields()),
          pair_dots(cfg.pair_count()),
          triple_dots(cfg.kind == ModelKind::fwfm_ctf3 ? cfg.num_fields * (cfg.num_fields - 1) / 2 : 0) {}
};

struct BatchStats {
    double loss = 0.0;
    double weight = 0.0;
};

// Forward pass plus gradient accumulation for one sample.
BatchStats accumulate_sample(const ModelParams& P, const SparseInstance& x, const TrainConfig& cfg,
                             GradientBuffer& buf, Workspace& ws) {
    const auto& ops = kernels::active();
    const ModelConfig& mc = P.config;
    const uint32_t K = mc.embed_dim;
    const uint32_t F = detail::gather_active(mc, x, ws.active.data());
    const uint32_t* active = ws.active.data();
    const uint32_t task = mc.kind == ModelKind::mt_fwfm ? x.conv_type : 0;
    const bool three_way = mc.kind == ModelKind::fwfm_ctf3;

    double main_sum = 0.0;
    for (uint32_t f = 0; f < F; ++f)
        main_sum += ops.dot(P.embedding(active[f]), P.main_weight(task, f), K);

    double pair_sum = 0.0;
    for (uint32_t p = 0; p + 1 < F; ++p) {
        const double* vp = P.embedding(active[p]);
        for (uint32_t q = p + 1; q < F; ++q) {
            const double d = ops.dot(vp, P.embedding(active[q]), K);
            ws.pair_dots[pair_index(p, q, F)] = d;
            pair_sum += d * P.pair_weight_value(task, p, q);
        }
    }

    double phi = P.bias[task] + main_sum + pair_sum;

    const double* vt = nullptr;
    if (three_way) {
        vt = P.embedding(active[mc.num_fields]);
        const uint32_t N = mc.num_fields;
        double triple_sum = 0.0;
        for (uint32_t p = 0; p + 1 < N; ++p) {
            const double* vp = P.embedding(active[p]);
            for (uint32_t q = p + 1; q < N; ++q) {
                const double d3 = ops.dot3(vp, P.embedding(active[q]), vt, K);
                ws.triple_dots[pair_index(p, q, N)] = d3;
                triple_sum += d3 * P.pair_weight_value(0, p, q);
            }
        }
        phi += triple_sum;
    }

    double prob = sigmoid(phi);
    if (prob < kProbEps) prob = kProbEps;
    if (prob > 1.0 - kProbEps) prob = 1.0 - kProbEps;

    BatchStats stats;
    stats.weight = x.weight;
    stats.loss = x.weight * (x.label ? -std::log(prob) : -std::log(1.0 - prob));
    const double g = x.weight * (prob - double(x.label));

    buf.touch_task(task);
    buf.bias(task) += g;
    for (uint32_t f = 0; f < F; ++f)
        ops.axpy(g, P.embedding(active[f]), buf.main_weight(task, f), K);

    if (mc.has_pair_weights()) {
        for (uint32_t p = 0; p + 1 < F; ++p)
            for (uint32_t q = p + 1; q < F; ++q)
                buf.pair_weight(task, p, q) += g * ws.pair_dots[pair_index(p, q, F)];
        if (three_way) {
            const uint32_t N = mc.num_fields;
            for (uint32_t p = 0; p + 1 < N; ++p)
                for (uint32_t q = p + 1; q < N; ++q)
                    buf.pair_weight(0, p, q) += g * ws.triple_dots[pair_index(p, q, N)];
        }
    }

    if (cfg.update_embeddings) {
        for (uint32_t f = 0; f < F; ++f) buf.touch_feature(active[f]);
        for (uint32_t f = 0; f < F; ++f)
            ops.axpy(g, P.main_weight(task, f), buf.embedding(active[f]), K);
        for (uint32_t p = 0; p + 1 < F; ++p) {
            for (uint32_t q = p + 1; q < F; ++q) {
                const double gr = g * P.pair_weight_value(task, p, q);
                ops.axpy(gr, P.embedding(active[q]), buf.embedding(active[p]), K);
                ops.axpy(gr, P.embedding(active[p]), buf.embedding(active[q]), K);
            }
        }
        if (three_way) {
            const uint32_t N = mc.num_fields;
            for (uint32_t p = 0; p + 1 < N; ++p) {
                for (uint32_t q = p + 1; q < N; ++q) {
                    const double gr = g * P.pair_weight_value(0, p, q);
                    ops.axpy_mul(gr, P.embedding(active[q]), vt, buf.embedding(active[p]), K);
                    ops.axpy_mul(gr, P.embedding(active[p]), vt, buf.embedding(active[q]), K);
                    ops.axpy_mul(gr, P.embedding(active[p]), P.embedding(active[q]),
                                 buf.embedding(active[mc.num_fields]), K);
                }
            }
        }
    }
    return stats;
}

// Pull touched regularized entries toward zero: gradient += 2*lambda*theta.
void apply_regularization(const ModelParams& P, const TrainConfig& cfg, GradientBuffer& buf) {
    if (cfg.reg_lambda == 0.0 || cfg.reg_kind == RegKind::none) return;
    const auto& ops = kernels::active();
    const ModelConfig& mc = P.config;
    const double two_lambda = 2.0 * cfg.reg_lambda;
    const size_t main_stride = size_t(mc.total_fields()) * mc.embed_dim;
    const size_t pair_stride = mc.pair_count();

    if (cfg.reg_kind == RegKind::l2_all) {
        for (uint32_t t = 0; t < mc.task_count(); ++t) {
            if (!buf.task_touched(t)) continue;
            ops.axpy(two_lambda, P.main_weights.data() + t * main_stride,
                     buf.main_weight(t, 0), main_stride);
            if (mc.has_pair_weights())
                ops.axpy(two_lambda, P.pair_weights.data() + t * pair_stride,
                         &buf.pair_weight(t, 0, 1), pair_stride);
        }
    }
    for (uint32_t f : buf.touched_features())
        ops.axpy(two_lambda, P.embedding(f), buf.embedding(f), mc.embed_dim);
}

double regularizer(const ModelParams& P, const TrainConfig& cfg) {
    if (cfg.reg_lambda == 0.0 || cfg.reg_kind == RegKind::none) return 0.0;
    const auto& ops = kernels::active();
    double omega = ops.sum_sq(P.embeddings.data(), P.embeddings.size());
    if (cfg.reg_kind == RegKind::l2_all) {
        omega += ops.sum_sq(P.main_weights.data(), P.main_weights.size());
        omega += ops.sum_sq(P.pair_weights.data(), P.pair_weights.size());
    }
    return cfg.reg_lambda * omega;
}

} // namespace

double loss(const ModelParams& params, std::span<const SparseInstance> batch, const TrainConfig& tconfig) {
    if (batch.empty()) throw DataError("loss of an empty batch is undefined");
    double sum = 0.0;
    for (const auto& x : batch) {
        const Prediction pred = predict(params, x);
        sum += x.weight * (x.label ? -std::log(pred.prob) : -std::log(1.0 - pred.prob));
    }
    return sum + regularizer(params, tconfig);
}

GradientBuffer gradients(const ModelParams& params, std::span<const SparseInstance> batch,
                         const TrainConfig& tconfig) {
    if (batch.empty()) throw DataError("gradient of an empty batch is undefined");
    GradientBuffer buf(params.config);
    Workspace ws(params.config);
    for (const auto& x : batch) accumulate_sample(params, x, tconfig, buf, ws);
    apply_regularization(params, tconfig, buf);
    return buf;
}

void sgd_step(ModelParams& params, const GradientBuffer& grads, const TrainConfig& tconfig) {
    const ModelConfig& mc = params.config;
    const ModelConfig& gc = grads.config();
    if (mc.kind != gc.kind || mc.num_fields != gc.num_fields || mc.num_features != gc.num_features ||
        mc.num_types != gc.num_types || mc.embed_dim != gc.embed_dim)
        throw DataError("gradient buffer shape does not match parameters");

    const auto& ops = kernels::active();
    const double eta = -tconfig.learning_rate;
    const size_t main_stride = size_t(mc.total_fields()) * mc.embed_dim;
    const size_t pair_stride = mc.pair_count();
    for (uint32_t t = 0; t < mc.task_count(); ++t) {
        if (!grads.task_touched(t)) continue;
        params.bias[t] += eta * grads.bias_slab()[t];
        ops.axpy(eta, grads.main_slab(t).data(), params.main_weights.data() + t * main_stride, main_stride);
        if (mc.has_pair_weights())
            ops.axpy(eta, grads.pair_slab(t).data(), params.pair_weights.data() + t * pair_stride, pair_stride);
    }
    for (uint32_t f : grads.touched_features())
        ops.axpy(eta, grads.embedding(f), params.embedding(f), mc.embed_dim);
}

std::vector<double> score_all(const ModelParams& params, std::span<const SparseInstance> instances,
                              uint32_t threads) {
    std::vector<double> scores(instances.size());
    const size_t n = instances.size();
    if (n == 0) return scores;
    const uint32_t nw = std::max<uint32_t>(1, std::min<uint32_t>(threads, uint32_t(n)));
    if (nw == 1) {
        for (size_t i = 0; i < n; ++i) scores[i] = predict(params, instances[i]).prob;
        return scores;
    }
    std::vector<std::thread> pool;
    pool.reserve(nw);
    const size_t chunk = (n + nw - 1) / nw;
    for (uint32_t w = 0; w < nw; ++w) {
        const size_t lo = w * chunk;
        const size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (size_t i = lo; i < hi; ++i) scores[i] = predict(params, instances[i]).prob;
        });
    }
    for (auto& th : pool) th.join();
    return scores;
}

TrainResult train(std::span<const SparseInstance> train_set, std::span<const SparseInstance> val_set,
                  const ModelConfig& mconfig, const TrainConfig& tconfig) {
    mconfig.validate();
    tconfig.validate();
    if (train_set.empty()) throw DataError("training set is empty");

    TrainResult res;
    res.params = init_params(mconfig, tconfig);
    ModelParams best_params = res.params;
    double best_auc = -std::numeric_limits<double>::infinity();
    uint32_t since_best = 0;

    Rng order_rng(tconfig.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<SparseInstance> order(train_set.begin(), train_set.end());
    const size_t n = order.size();

    // One accumulation worker in deterministic mode (strict instance-order
    // sums); otherwise fixed contiguous chunks merged in worker order, so a
    // given thread count still reproduces.
    const uint32_t workers = tconfig.deterministic ? 1 : std::max<uint32_t>(1, tconfig.threads);
    std::vector<GradientBuffer> bufs;
    std::vector<Workspace> spaces;
    for (uint32_t w = 0; w < workers; ++w) {
        bufs.emplace_back(mconfig);
        spaces.emplace_back(mconfig);
    }

    for (uint32_t epoch = 1; epoch <= tconfig.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        if (tconfig.sample_with_replacement) {
            for (size_t i = 0; i < n; ++i) order[i] = train_set[order_rng.uniform_int(n)];
        } else {
            order_rng.shuffle(order);
        }

        double epoch_loss = 0.0;
        double epoch_weight = 0.0;
        for (size_t start = 0; start < n; start += tconfig.batch_size) {
            const size_t stop = std::min(n, start + tconfig.batch_size);
            const std::span<const SparseInstance> batch(order.data() + start, stop - start);

            BatchStats stats;
            if (workers == 1 || batch.size() < 2 * workers) {
                for (const auto& x : batch) {
                    const BatchStats s = accumulate_sample(res.params, x, tconfig, bufs[0], spaces[0]);
                    stats.loss += s.loss;
                    stats.weight += s.weight;
                }
            } else {
                const size_t chunk = (batch.size() + workers - 1) / workers;
                std::vector<BatchStats> partial(workers);
                std::vector<std::thread> pool;
                for (uint32_t w = 0; w < workers; ++w) {
                    const size_t lo = w * chunk;
                    const size_t hi = std::min(batch.size(), lo + chunk);
                    if (lo >= hi) break;
                    pool.emplace_back([&, w, lo, hi] {
                        for (size_t i = lo; i < hi; ++i) {
                            const BatchStats s =
                                accumulate_sample(res.params, batch[i], tconfig, bufs[w], spaces[w]);
                            partial[w].loss += s.loss;
                            partial[w].weight += s.weight;
                        }
                    });
                }
                for (auto& th : pool) th.join();
                for (uint32_t w = 0; w < workers; ++w) {
                    stats.loss += partial[w].loss;
                    stats.weight += partial[w].weight;
                    if (w > 0) bufs[0].merge(bufs[w]);
                }
            }
            if (!std::isfinite(stats.loss))
                throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));

            apply_regularization(res.params, tconfig, bufs[0]);
            sgd_step(res.params, bufs[0], tconfig);
            for (auto& b : bufs) b.clear();
            epoch_loss += stats.loss;
            epoch_weight += stats.weight;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_weight > 0.0 ? epoch_loss / epoch_weight : 0.0;
        rec.val_auc_per_type.assign(mconfig.num_types, std::numeric_limits<double>::quiet_NaN());

        if (!val_set.empty()) {
            const std::vector<double> scores = score_all(res.params, val_set, tconfig.threads);
            std::vector<ScoredSample> scored(val_set.size());
            for (size_t i = 0; i < val_set.size(); ++i)
                scored[i] = {scores[i], val_set[i].label, val_set[i].conv_type};
            try {
                const MetricsReport rep = report(scored);
                rec.has_val = true;
                rec.val_auc_overall = rep.auc_overall;
                rec.val_auc_weighted = rep.auc_weighted;
                for (const auto& tm : rep.per_type)
                    if (tm.type < rec.val_auc_per_type.size()) rec.val_auc_per_type[tm.type] = tm.auc;
                if (rep.auc_weighted > best_auc) {
                    best_auc = rep.auc_weighted;
                    best_params = res.params;
                    res.best_epoch = epoch;
                    since_best = 0;
                } else {
                    ++since_best;
                }
            } catch (const DataError&) {
                // Validation metrics undefined this epoch (e.g. one-class
                // types only); skip model selection.
            }
        }

        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        res.log.push_back(std::move(rec));
        if (res.best_epoch > 0 && since_best > tconfig.early_stop_patience) break;
    }

    if (res.best_epoch > 0) res.params = std::move(best_params);
    return res;
}

} // namespace mtfwfm
