#include "bdc/fewshot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "bdc/bdc_metric.hpp"
#include "bdc/errors.hpp"

namespace bdc {

const char* to_string(ObservationAxis axis) noexcept {
    switch (axis) {
    case ObservationAxis::channels: return "channels";
    case ObservationAxis::positions: return "positions";
    }
    return "unknown";
}

ObservationAxis parse_observation_axis(const std::string& name) {
    if (name == "channels") return ObservationAxis::channels;
    if (name == "positions") return ObservationAxis::positions;
    throw std::invalid_argument("unknown observation axis '" + name + "'");
}

Vector bdc_embedding(const Matrix& map, const Projection& projection, ObservationAxis axis) {
    const Matrix reduced = project(projection, map);
    const Matrix obs = axis == ObservationAxis::channels ? transpose(reduced) : reduced;
    return bdc_matrix(obs, true).values.storage();
}

PrototypeSet average_prototypes(const std::vector<std::vector<Vector>>& vectors_by_class,
                                std::size_t side) {
    if (vectors_by_class.empty()) throw DataError("build_prototypes: no classes");
    const std::size_t dim = side * side;
    PrototypeSet set;
    set.side = side;
    set.shots = vectors_by_class.front().size();
    set.prototypes = Matrix(vectors_by_class.size(), dim);
    for (std::size_t n = 0; n < vectors_by_class.size(); ++n) {
        const auto& members = vectors_by_class[n];
        if (members.empty()) {
            throw DataError("build_prototypes: class " + std::to_string(n) + " has no shots");
        }
        auto proto = set.prototypes.row(n);
        for (const Vector& v : members) {
            if (v.size() != dim) throw DimensionError("build_prototypes: inconsistent map shapes");
            for (std::size_t j = 0; j < dim; ++j) proto[j] += v[j];
        }
        const double inv = 1.0 / static_cast<double>(members.size());
        for (double& x : proto) x *= inv;
        const Vector unit = l2_normalize(proto);
        std::copy(unit.begin(), unit.end(), proto.begin());
    }
    return set;
}

PrototypeSet build_prototypes(const std::vector<std::vector<Matrix>>& support_by_class,
                              const Projection& projection, ObservationAxis axis) {
    std::vector<std::vector<Vector>> vectors(support_by_class.size());
    std::size_t side = 0;
    for (std::size_t n = 0; n < support_by_class.size(); ++n) {
        for (const Matrix& map : support_by_class[n]) {
            vectors[n].push_back(bdc_embedding(map, projection, axis));
            const std::size_t s = static_cast<std::size_t>(
                std::llround(std::sqrt(static_cast<double>(vectors[n].back().size()))));
            if (side == 0) side = s;
            if (s != side) throw DimensionError("build_prototypes: inconsistent map shapes");
        }
    }
    return average_prototypes(vectors, side);
}

Vector prototype_scores(std::span<const double> embedding, const PrototypeSet& protos,
                        double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("prototype_scores: delta must be positive");
    if (embedding.size() != protos.proto_dim()) {
        throw DimensionError("prototype_scores: embedding has " + std::to_string(embedding.size()) +
                             " entries, prototypes have " + std::to_string(protos.proto_dim()));
    }
    Vector scores(protos.num_classes());
    for (std::size_t n = 0; n < scores.size(); ++n) {
        // Unit vectors can overshoot |cos| = 1 by a rounding step; keep scores in (0, 1].
        const double cosine = std::clamp(dot(embedding, protos.prototypes.row(n)), -1.0, 1.0);
        scores[n] = std::exp(-delta * (1.0 - cosine));
    }
    return scores;
}

Vector prototype_scores(const Matrix& map, const PrototypeSet& protos,
                        const Projection& projection, ObservationAxis axis, double delta) {
    return prototype_scores(bdc_embedding(map, projection, axis), protos, delta);
}

Vector fuse(std::span<const double> p_b, std::span<const double> p_m, double alpha) {
    if (p_b.size() != p_m.size()) {
        throw DimensionError("fuse: lengths " + std::to_string(p_b.size()) + " and " +
                             std::to_string(p_m.size()));
    }
    Vector out(p_b.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * p_b[i] + p_m[i];
    return out;
}

std::size_t argmax(std::span<const double> scores) {
    if (scores.empty()) throw DimensionError("argmax: empty score vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return best;
}

Vector zero_shot_scores(std::span<const double> image, const Matrix& text_features, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("zero_shot_scores: tau must be positive");
    if (text_features.rows() == 0) throw DimensionError("zero_shot_scores: no classes");
    if (text_features.cols() != image.size()) throw DimensionError("zero_shot_scores: dim mismatch");
    const Vector f = l2_normalize(image);
    Vector logits(text_features.rows());
    for (std::size_t n = 0; n < logits.size(); ++n) {
        const Vector t = l2_normalize(text_features.row(n));
        logits[n] = dot(f, t) / tau;
    }
    return softmax(logits);
}

Prediction predict(const QueryItem& item, const Model& model, const FusionConfig& cfg) {
    if (!(cfg.alpha >= 0.0)) throw std::invalid_argument("predict: alpha must be non-negative");
    if (model.head.num_classes() != model.prototypes.num_classes()) {
        throw DimensionError("predict: head and prototypes disagree on class count");
    }
    Prediction p;
    p.p_m = forward(model.head, item.embedding);
    p.p_b = prototype_scores(item.map, model.prototypes, model.projection, model.axis, cfg.delta);
    p.fused = fuse(p.p_b, p.p_m, cfg.alpha);
    p.label = argmax(p.fused);
    return p;
}

AccuracyReport evaluate(std::span<const QueryItem> queries, const Model& model,
                        const FusionConfig& cfg, unsigned workers) {
    if (queries.empty()) throw DataError("evaluate: empty query set");
    const std::size_t n_classes = model.head.num_classes();
    for (const QueryItem& q : queries) {
        if (q.label >= n_classes) {
            throw DimensionError("evaluate: query '" + q.id + "' has label " +
                                 std::to_string(q.label) + " outside " +
                                 std::to_string(n_classes) + " classes");
        }
    }

    std::vector<Prediction> predictions(queries.size());
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(queries.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < queries.size(); ++i)
            predictions[i] = predict(queries[i], model, cfg);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = w; i < queries.size(); i += workers)
                            predictions[i] = predict(queries[i], model, cfg);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    AccuracyReport report;
    report.total = queries.size();
    report.class_counts.assign(n_classes, 0);
    report.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    std::vector<std::size_t> class_correct(n_classes, 0);
    std::size_t zs_correct = 0;
    const bool zero_shot = model.text_features.rows() == n_classes && n_classes > 0;

    for (std::size_t i = 0; i < queries.size(); ++i) {
        const QueryItem& q = queries[i];
        const std::size_t pred = predictions[i].label;
        ++report.class_counts[q.label];
        ++report.confusion[q.label][pred];
        if (pred == q.label) {
            ++report.correct;
            ++class_correct[q.label];
        }
        if (zero_shot && argmax(zero_shot_scores(q.embedding, model.text_features, cfg.tau)) == q.label)
            ++zs_correct;
        report.records.push_back(QueryRecord{q.id, q.label, std::move(predictions[i])});
    }
    report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
    report.per_class.resize(n_classes);
    for (std::size_t n = 0; n < n_classes; ++n) {
        report.per_class[n] = report.class_counts[n] == 0
                                  ? 0.0
                                  : static_cast<double>(class_correct[n]) /
                                        static_cast<double>(report.class_counts[n]);
    }
    if (zero_shot) {
        report.zero_shot_accuracy =
            static_cast<double>(zs_correct) / static_cast<double>(report.total);
    }
    return report;
}

GridResult grid_search(std::span<const double> alphas, std::span<const double> deltas,
                       std::span<const QueryItem> validation, const Model& model,
                       const FusionConfig& base) {
    if (alphas.empty() || deltas.empty()) throw DataError("grid_search: empty grid");
    if (validation.empty()) throw DataError("grid_search: empty validation set");

    // p_m and the BDC embeddings do not depend on (alpha, delta).
    std::vector<Vector> logits, embeddings;
    for (const QueryItem& q : validation) {
        logits.push_back(forward(model.head, q.embedding));
        embeddings.push_back(bdc_embedding(q.map, model.projection, model.axis));
    }

    GridResult result;
    bool have_best = false;
    for (double alpha : alphas) {
        for (double delta : deltas) {
            if (!(delta > 0.0) || !(alpha >= 0.0))
                throw std::invalid_argument("grid_search: need alpha >= 0 and delta > 0");
            std::size_t correct = 0;
            for (std::size_t i = 0; i < validation.size(); ++i) {
                const Vector p_b = prototype_scores(embeddings[i], model.prototypes, delta);
                if (argmax(fuse(p_b, logits[i], alpha)) == validation[i].label) ++correct;
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(validation.size());
            result.table.push_back(GridRow{alpha, delta, acc});

            const bool better =
                !have_best || acc > result.best_accuracy ||
                (acc == result.best_accuracy &&
                 (alpha < result.best.alpha ||
                  (alpha == result.best.alpha && delta < result.best.delta)));
            if (better) {
                have_best = true;
                result.best_accuracy = acc;
                result.best = FusionConfig{alpha, delta, base.tau};
            }
        }
    }
    return result;
}

double prototype_only_accuracy(std::span<const QueryItem> queries, const Model& model,
                               double delta) {
    if (queries.empty()) throw DataError("prototype_only_accuracy: empty query set");
    std::size_t correct = 0;
    for (const QueryItem& q : queries) {
        const Vector p_b =
            prototype_scores(q.map, model.prototypes, model.projection, model.axis, delta);
        if (argmax(p_b) == q.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(queries.size());
}

Matrix embedding_prototypes(const std::vector<std::vector<Vector>>& embeddings_by_class) {
    if (embeddings_by_class.empty() || embeddings_by_class.front().empty())
        throw DataError("embedding_prototypes: empty support");
    const std::size_t d = embeddings_by_class.front().front().size();
    Matrix protos(embeddings_by_class.size(), d);
    for (std::size_t n = 0; n < embeddings_by_class.size(); ++n) {
        if (embeddings_by_class[n].empty())
            throw DataError("embedding_prototypes: class " + std::to_string(n) + " has no shots");
        auto row = protos.row(n);
        for (const Vector& e : embeddings_by_class[n]) {
            if (e.size() != d) throw DimensionError("embedding_prototypes: dim mismatch");
            for (std::size_t j = 0; j < d; ++j) row[j] += e[j];
        }
        const Vector unit = l2_normalize(row);
        std::copy(unit.begin(), unit.end(), row.begin());
    }
    return protos;
}

double embedding_prototype_accuracy(std::span<const QueryItem> queries,
                                    const Matrix& embedding_protos) {
    if (queries.empty()) throw DataError("embedding_prototype_accuracy: empty query set");
    std::size_t correct = 0;
    for (const QueryItem& q : queries) {
        const Vector e = l2_normalize(q.embedding);
        if (argmax(matvec(embedding_protos, e)) == q.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(queries.size());
}

} // namespace bdc
