#include "bdc/head.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "bdc/errors.hpp"
#include "bdc/optim.hpp"
#include "bdc/rng.hpp"

namespace bdc {

LinearHead init_from_text(const Matrix& text_features) {
    if (text_features.rows() == 0 || text_features.cols() == 0) {
        throw DimensionError("init_from_text: empty text feature matrix");
    }
    LinearHead head{Matrix(text_features.rows(), text_features.cols())};
    for (std::size_t n = 0; n < text_features.rows(); ++n) {
        const Vector row = l2_normalize(text_features.row(n));
        std::copy(row.begin(), row.end(), head.weights.row(n).begin());
    }
    return head;
}

LinearHead init_random(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
    if (num_classes == 0 || dim == 0) throw DimensionError("init_random: zero dimension");
    Rng rng(seed);
    LinearHead head{Matrix(num_classes, dim)};
    for (std::size_t n = 0; n < num_classes; ++n) {
        auto row = head.weights.row(n);
        for (double& v : row) v = rng.normal();
        const Vector unit = l2_normalize(row);
        std::copy(unit.begin(), unit.end(), row.begin());
    }
    return head;
}

Vector softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double top = *std::max_element(logits.begin(), logits.end());
    Vector p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - top);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

Vector forward(const LinearHead& head, std::span<const double> f) {
    if (f.size() != head.dim()) {
        throw DimensionError("forward: feature dim " + std::to_string(f.size()) +
                             ", head dim " + std::to_string(head.dim()));
    }
    return matvec(head.weights, f);
}

void validate_batch(const LinearHead& head, const Batch& batch) {
    if (batch.features.rows() != batch.labels.size()) {
        throw DimensionError("batch: " + std::to_string(batch.features.rows()) + " rows but " +
                             std::to_string(batch.labels.size()) + " labels");
    }
    if (batch.features.rows() > 0 && batch.features.cols() != head.dim()) {
        throw DimensionError("batch: feature dim " + std::to_string(batch.features.cols()) +
                             ", head dim " + std::to_string(head.dim()));
    }
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        if (batch.labels[i] >= head.num_classes()) {
            throw DimensionError("batch: label " + std::to_string(batch.labels[i]) +
                                 " out of range for " + std::to_string(head.num_classes()) +
                                 " classes");
        }
        if (std::abs(l2_norm(batch.features.row(i)) - 1.0) > 1e-10) {
            throw DegenerateInput("batch: row " + std::to_string(i) + " is not unit-norm");
        }
    }
}

double ce_loss(const LinearHead& head, const Batch& batch) {
    validate_batch(head, batch);
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        const Vector z = forward(head, batch.features.row(i));
        const double top = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - top);
        loss += top + std::log(sum) - z[batch.labels[i]];
    }
    return loss;
}

Matrix ce_grad(const LinearHead& head, const Batch& batch) {
    validate_batch(head, batch);
    Matrix grad(head.num_classes(), head.dim());
    for (std::size_t i = 0; i < batch.labels.size(); ++i) {
        const auto f = batch.features.row(i);
        Vector p = softmax(forward(head, f));
        p[batch.labels[i]] -= 1.0;
        for (std::size_t n = 0; n < p.size(); ++n) {
            auto g = grad.row(n);
            for (std::size_t j = 0; j < f.size(); ++j) g[j] += p[n] * f[j];
        }
    }
    return grad;
}

namespace {

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw DataError("train: epochs must be >= 1");
    if (!(cfg.base_lr >= 0.0) || !std::isfinite(cfg.base_lr))
        throw DataError("train: learning rate must be finite and non-negative");
    if (cfg.image_batch + cfg.text_batch.value_or(1) < 1)
        throw DataError("train: batch must contain at least one sample");
}

using EpochBatches = std::function<std::vector<Batch>(std::size_t epoch)>;

TrainResult run_training(LinearHead head, const EpochBatches& batches_for_epoch,
                         std::size_t steps_per_epoch, const TrainConfig& cfg) {
    TrainResult result;
    const std::size_t total = cfg.epochs * steps_per_epoch;
    AdamW opt(head.weights.size(),
              AdamW::Params{cfg.beta1, cfg.beta2, cfg.epsilon, cfg.weight_decay});

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<Batch> batches = batches_for_epoch(epoch);
        double epoch_loss = 0.0;
        std::size_t samples = 0;
        for (const Batch& batch : batches) {
            if (batch.labels.empty()) continue;
            const double loss = ce_loss(head, batch);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss " << loss << " at epoch " << epoch << " step "
                    << step;
                throw NumericalError(msg.str());
            }
            const Matrix grad = ce_grad(head, batch);
            opt.step(head.weights.data(), grad.data(), cosine_annealing_lr(cfg.base_lr, step, total));
            if (!all_finite(head.weights.data())) {
                throw NumericalError("train: non-finite weights after step " + std::to_string(step));
            }
            epoch_loss += loss;
            samples += batch.labels.size();
            ++step;
        }
        result.epoch_loss.push_back(samples > 0 ? epoch_loss / static_cast<double>(samples) : 0.0);
    }
    result.head = std::move(head);
    result.steps = step;
    return result;
}

} // namespace

TrainResult train(LinearHead head, std::span<const Batch> batches, const TrainConfig& cfg) {
    validate_config(cfg);
    if (batches.empty()) throw DataError("train: no batches");
    for (const Batch& b : batches) validate_batch(head, b);
    std::vector<Batch> fixed(batches.begin(), batches.end());
    return run_training(
        std::move(head), [&fixed](std::size_t) { return fixed; }, fixed.size(), cfg);
}

TrainResult train(LinearHead head, const TrainingPool& pool, const TrainConfig& cfg) {
    validate_config(cfg);
    const std::size_t n_img = pool.image_labels.size();
    const std::size_t n_txt = pool.text_labels.size();
    if (pool.image_features.rows() != n_img || pool.text_features.rows() != n_txt)
        throw DimensionError("train: pool features and labels disagree");

    const std::size_t image_batch = n_img > 0 ? cfg.image_batch : 0;
    const std::size_t text_batch = n_txt > 0 ? cfg.text_batch.value_or(head.num_classes()) : 0;
    if (image_batch + text_batch == 0) throw DataError("train: empty training pool");

    const std::size_t steps_per_epoch = image_batch > 0
                                            ? (n_img + image_batch - 1) / image_batch
                                            : (n_txt + text_batch - 1) / text_batch;

    Rng rng(cfg.seed);
    std::vector<std::size_t> img_order(n_img), txt_order(n_txt);
    std::size_t txt_cursor = n_txt; // forces a shuffle on first use

    auto next_text = [&]() {
        if (txt_cursor >= n_txt) {
            std::iota(txt_order.begin(), txt_order.end(), std::size_t{0});
            rng.shuffle(std::span<std::size_t>(txt_order));
            txt_cursor = 0;
        }
        return txt_order[txt_cursor++];
    };

    auto make_epoch = [&](std::size_t) {
        std::iota(img_order.begin(), img_order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(img_order));
        std::vector<Batch> batches;
        batches.reserve(steps_per_epoch);
        for (std::size_t s = 0; s < steps_per_epoch; ++s) {
            std::vector<std::size_t> img_idx, txt_idx;
            if (image_batch > 0) {
                const std::size_t begin = s * image_batch;
                const std::size_t end = std::min(n_img, begin + image_batch);
                img_idx.assign(img_order.begin() + static_cast<std::ptrdiff_t>(begin),
                               img_order.begin() + static_cast<std::ptrdiff_t>(end));
            }
            for (std::size_t t = 0; t < text_batch; ++t) txt_idx.push_back(next_text());

            Batch b{Matrix(img_idx.size() + txt_idx.size(), head.dim()), {}};
            std::size_t r = 0;
            for (std::size_t i : img_idx) {
                const auto src = pool.image_features.row(i);
                std::copy(src.begin(), src.end(), b.features.row(r++).begin());
                b.labels.push_back(pool.image_labels[i]);
            }
            for (std::size_t i : txt_idx) {
                const auto src = pool.text_features.row(i);
                std::copy(src.begin(), src.end(), b.features.row(r++).begin());
                b.labels.push_back(pool.text_labels[i]);
            }
            batches.push_back(std::move(b));
        }
        return batches;
    };

    return run_training(std::move(head), make_epoch, steps_per_epoch, cfg);
}

} // namespace bdc
