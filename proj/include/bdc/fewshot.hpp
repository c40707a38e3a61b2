#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdc/head.hpp"
#include "bdc/linalg.hpp"
#include "bdc/reduction.hpp"

namespace bdc {

/// Which axis of a (channels x positions) feature map supplies the BDC observations.
///   channels:  every projected channel is one observation, its values over the
///              spatial positions are the coordinates; BDC side == projection out_dim.
///   positions: every spatial position is one observation in channel space;
///              BDC side == number of positions.
enum class ObservationAxis : std::uint8_t {
    channels = 0,
    positions = 1,
};

const char* to_string(ObservationAxis axis) noexcept;
ObservationAxis parse_observation_axis(const std::string& name);

struct FusionConfig {
    double alpha = 1.0; // residual ratio on the prototype scores
    double delta = 1.0; // sharpness of exp(-delta (1 - cos))
    double tau = 0.01;  // zero-shot softmax temperature

    bool operator==(const FusionConfig&) const = default;
};

/// Per-class unit-norm vectorized mean BDC matrices.
struct PrototypeSet {
    std::size_t side = 0;  // BDC matrix side m; vectors have m*m entries
    std::size_t shots = 0; // support items per class
    Matrix prototypes;     // N x (side*side)

    std::size_t num_classes() const noexcept { return prototypes.rows(); }
    std::size_t proto_dim() const noexcept { return prototypes.cols(); }

    bool operator==(const PrototypeSet&) const = default;
};

/// Project the map, build its unit-Frobenius BDC matrix along `axis`, and vectorize
/// row-major. Throws DegenerateInput when all observations coincide.
Vector bdc_embedding(const Matrix& map, const Projection& projection, ObservationAxis axis);

/// Mean of each class's vectors, re-normalized to unit length.
PrototypeSet average_prototypes(const std::vector<std::vector<Vector>>& vectors_by_class,
                                std::size_t side);

PrototypeSet build_prototypes(const std::vector<std::vector<Matrix>>& support_by_class,
                              const Projection& projection, ObservationAxis axis);

/// exp(-delta * (1 - cos)) against every prototype, for a precomputed bdc_embedding.
Vector prototype_scores(std::span<const double> embedding, const PrototypeSet& protos,
                        double delta);
Vector prototype_scores(const Matrix& map, const PrototypeSet& protos,
                        const Projection& projection, ObservationAxis axis, double delta);

/// alpha * p_b + p_m.
Vector fuse(std::span<const double> p_b, std::span<const double> p_m, double alpha);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> scores);

/// softmax(cos(image, text_n) / tau) over classes.
Vector zero_shot_scores(std::span<const double> image, const Matrix& text_features, double tau);

struct Model {
    LinearHead head;
    Projection projection;
    ObservationAxis axis = ObservationAxis::channels;
    PrototypeSet prototypes;
    /// Optional N x d text features; enables the zero-shot column of reports.
    Matrix text_features;
};

struct QueryItem {
    std::string id;
    std::size_t label = 0;
    Vector embedding; // unit-norm global feature
    Matrix map;       // channels x positions feature map
};

struct Prediction {
    std::size_t label = 0;
    Vector p_b;
    Vector p_m;
    Vector fused;
};

Prediction predict(const QueryItem& item, const Model& model, const FusionConfig& cfg);

struct QueryRecord {
    std::string id;
    std::size_t truth = 0;
    Prediction prediction;
};

struct AccuracyReport {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
    std::vector<std::size_t> class_counts;
    Vector per_class; // correct / count, 0 for classes without queries
    std::vector<std::vector<std::size_t>> confusion; // [truth][predicted]
    std::optional<double> zero_shot_accuracy;
    std::vector<QueryRecord> records; // query order
};

/// Predictions may be computed on `workers` threads; aggregation always walks the
/// queries in input order, so the report does not depend on the worker count.
AccuracyReport evaluate(std::span<const QueryItem> queries, const Model& model,
                        const FusionConfig& cfg, unsigned workers = 1);

struct GridRow {
    double alpha = 0.0;
    double delta = 0.0;
    double accuracy = 0.0;
};

struct GridResult {
    FusionConfig best;
    double best_accuracy = 0.0;
    std::vector<GridRow> table; // alpha-major, grid order
};

/// Exhaustive search; best by accuracy, ties to smaller alpha, then smaller delta.
/// tau is carried over from `base`.
GridResult grid_search(std::span<const double> alphas, std::span<const double> deltas,
                       std::span<const QueryItem> validation, const Model& model,
                       const FusionConfig& base = {});

/// Accuracy of argmax p_b alone (the alpha -> infinity limit of the fusion).
double prototype_only_accuracy(std::span<const QueryItem> queries, const Model& model,
                               double delta);

/// Cosine nearest-class-mean over global embeddings: each class prototype is the
/// normalized mean of its support embeddings.
Matrix embedding_prototypes(const std::vector<std::vector<Vector>>& embeddings_by_class);
double embedding_prototype_accuracy(std::span<const QueryItem> queries,
                                    const Matrix& embedding_protos);

} // namespace bdc
