#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdc/linalg.hpp"

namespace bdc {

/// One-layer multi-modal reasoning network: logits = W f, one row per class, no bias.
struct LinearHead {
    Matrix weights; // N x d

    std::size_t num_classes() const noexcept { return weights.rows(); }
    std::size_t dim() const noexcept { return weights.cols(); }

    bool operator==(const LinearHead&) const = default;
};

/// Mixed image/text training samples. Rows are L2-normalized features.
struct Batch {
    Matrix features;
    std::vector<std::size_t> labels;
};

struct TrainConfig {
    std::size_t epochs = 30;
    double base_lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
    /// Image samples per step. 0 trains on text features only.
    std::size_t image_batch = 8;
    /// Text samples per step; unset means one per class.
    std::optional<std::size_t> text_batch;
    std::uint64_t seed = 0;
};

/// Everything the sampler may draw from when assembling batches.
struct TrainingPool {
    Matrix image_features;
    std::vector<std::size_t> image_labels;
    Matrix text_features;
    std::vector<std::size_t> text_labels;
};

struct TrainResult {
    LinearHead head;
    /// Mean per-sample loss of each epoch, measured on each batch before its update.
    std::vector<double> epoch_loss;
    std::size_t steps = 0;
};

/// Rows are the L2-normalized text features. Throws DegenerateInput on a zero row.
LinearHead init_from_text(const Matrix& text_features);

/// Seeded Gaussian rows scaled to unit norm; the "without initialization" baseline.
LinearHead init_random(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

Vector softmax(std::span<const double> logits);

/// Raw per-class scores w_n . f (no softmax).
Vector forward(const LinearHead& head, std::span<const double> f);

/// Summed (not averaged) cross-entropy over the batch, computed with max-subtraction.
double ce_loss(const LinearHead& head, const Batch& batch);

/// dL/dW = sum_i (softmax(W f_i) - onehot(y_i)) f_i^T.
Matrix ce_grad(const LinearHead& head, const Batch& batch);

/// Throws DimensionError / DegenerateInput if the batch does not fit the head or
/// rows are not unit-norm within 1e-10.
void validate_batch(const LinearHead& head, const Batch& batch);

/// AdamW under a per-step cosine-annealed learning rate. Fixed batches are visited
/// in order every epoch.
TrainResult train(LinearHead head, std::span<const Batch> batches, const TrainConfig& cfg);

/// As above, but batches are resampled every epoch from `pool` using cfg.seed:
/// images are shuffled and cut into chunks of image_batch; each step also draws
/// text_batch text samples (without replacement while the pool lasts).
TrainResult train(LinearHead head, const TrainingPool& pool, const TrainConfig& cfg);

} // namespace bdc
