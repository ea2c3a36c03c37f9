#pragma once

#include "mtfwfm/model.hpp"
#include "mtfwfm/schema.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace mtfwfm {

enum class RegKind : uint32_t {
    l2_all = 0,        // embeddings, main weights, pair weights; biases excluded
    l2_embed_only = 1, // embeddings only
    none = 2,
};

RegKind reg_kind_from_name(const std::string& name); // throws DataError
const char* reg_kind_name(RegKind kind);

struct TrainConfig {
    double learning_rate = 0.05;
    double reg_lambda = 0.0;
    RegKind reg_kind = RegKind::l2_all;
    uint32_t batch_size = 256;
    uint32_t max_epochs = 10;
    uint64_t seed = 1;
    double init_scale = 0.1;
    bool deterministic = true;
    // Stop after this many consecutive epochs without a validation
    // weighted-AUC improvement. The default never triggers.
    uint32_t early_stop_patience = std::numeric_limits<uint32_t>::max();
    // Draw each batch i.i.d. with replacement instead of shuffling and
    // partitioning the dataset once per epoch.
    bool sample_with_replacement = false;
    uint32_t threads = 1;
    // Test switch: keep shared embeddings fixed so per-type parameter
    // trajectories can be compared in isolation.
    bool update_embeddings = true;

    void validate() const; // throws DataError
};

// Gradient accumulator shaped like ModelParams. Storage is dense but only
// entries touched by the accumulated batch are meaningful: same-type samples
// feed a type's bias/main/pair entries, any sample feeds the embedding rows
// of its active features. The regularization term follows the same sparsity
// (touched entries only), so a batch without type-t samples never moves
// type-t parameters.
class GradientBuffer {
public:
    explicit GradientBuffer(const ModelConfig& config);

    const ModelConfig& config() const { return config_; }

    double& bias(uint32_t task) { return bias_[task]; }
    double* main_weight(uint32_t task, uint32_t field) {
        return main_.data() + (size_t(task) * config_.total_fields() + field) * config_.embed_dim;
    }
    double& pair_weight(uint32_t task, uint32_t p, uint32_t q) {
        return pairs_[size_t(task) * config_.pair_count() + pair_index(p, q, config_.total_fields())];
    }
    double* embedding(uint32_t feature) { return emb_.data() + size_t(feature) * config_.embed_dim; }
    const double* embedding(uint32_t feature) const { return emb_.data() + size_t(feature) * config_.embed_dim; }

    void touch_task(uint32_t task);
    void touch_feature(uint32_t feature);
    bool task_touched(uint32_t task) const { return task_touched_[task] != 0; }
    bool feature_touched(uint32_t feature) const { return feature_touched_[feature] != 0; }
    const std::vector<uint32_t>& touched_features() const { return touched_feature_list_; }

    // Zero the touched entries and forget the touch marks.
    void clear();
    // Add another buffer accumulated over the same shapes.
    void merge(const GradientBuffer& other);

    // Direct slab access for the update step.
    std::span<const double> bias_slab() const { return bias_; }
    std::span<const double> main_slab(uint32_t task) const;
    std::span<const double> pair_slab(uint32_t task) const;

private:
    friend class Trainer;
    ModelConfig config_;
    std::vector<double> bias_, emb_, main_, pairs_;
    std::vector<uint8_t> task_touched_;
    std::vector<uint8_t> feature_touched_;
    std::vector<uint32_t> touched_feature_list_;
};

// Uniform random init in [-init_scale, init_scale] for embeddings and main
// weights, zero biases, zero pair weights. Seed-deterministic.
ModelParams init_params(const ModelConfig& mconfig, const TrainConfig& tconfig);

// Sum over the batch of weighted binary log loss, plus lambda times the
// squared L2 norm of the regularized parameter groups.
double loss(const ModelParams& params, std::span<const SparseInstance> batch, const TrainConfig& tconfig);

// Analytic gradient of the batch data loss, plus the regularization pull
// 2*lambda*theta on every touched regularized entry.
GradientBuffer gradients(const ModelParams& params, std::span<const SparseInstance> batch,
                         const TrainConfig& tconfig);

// In-place SGD update of the touched entries. Throws DataError on shape
// mismatch between the buffer and the parameters.
void sgd_step(ModelParams& params, const GradientBuffer& grads, const TrainConfig& tconfig);

struct EpochRecord {
    uint32_t epoch = 0;       // 1-based
    double train_loss = 0.0;  // mean weighted data log loss per sample
    bool has_val = false;
    double val_auc_overall = 0.0;
    double val_auc_weighted = 0.0;
    std::vector<double> val_auc_per_type; // NaN for absent/excluded types
    double wall_ms = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> log;
    uint32_t best_epoch = 0; // 1-based; 0 when no validation selection happened
};

// Mini-batch SGD over shuffled epochs. Each epoch scores the validation set
// and the parameters from the best validation weighted-AUC epoch are
// returned (final parameters when `val` is empty). Throws DataError on an
// empty training set and NumericError when the loss turns non-finite.
TrainResult train(std::span<const SparseInstance> train_set, std::span<const SparseInstance> val_set,
                  const ModelConfig& mconfig, const TrainConfig& tconfig);

// Scores for a frozen model, in dataset order; parallelized over `threads`.
std::vector<double> score_all(const ModelParams& params, std::span<const SparseInstance> instances,
                              uint32_t threads);

} // namespace mtfwfm
