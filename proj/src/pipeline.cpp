#include "bdc/pipeline.hpp"

#include <algorithm>
#include <string>

#include "bdc/errors.hpp"
#include "bdc/rng.hpp"

namespace bdc {

std::uint64_t PipelineConfig::episode_seed() const noexcept { return derive_seed(seed, 10); }
std::uint64_t PipelineConfig::projection_seed() const noexcept { return derive_seed(seed, 11); }
std::uint64_t PipelineConfig::train_seed() const noexcept { return derive_seed(seed, 12); }
std::uint64_t PipelineConfig::random_init_seed() const noexcept { return derive_seed(seed, 13); }

SupportData load_support(const FeatureBank& bank, const Manifest& manifest, std::size_t shots,
                         std::uint64_t episode_seed) {
    validate_manifest(manifest, bank);
    if (!bank.has_maps()) throw DataError("bank carries no feature maps");

    SupportData s;
    s.episode = sample_episode(bank, manifest, shots, episode_seed);
    const std::size_t n_classes = manifest.classes.size();
    const std::size_t d = bank.dim;

    s.maps.resize(n_classes);
    s.embeddings.resize(n_classes);
    s.pool.image_features = Matrix(n_classes * shots, d);
    std::size_t r = 0;
    for (std::size_t n = 0; n < n_classes; ++n) {
        for (std::size_t idx : s.episode.support[n]) {
            const BankItem& item = bank.items[idx];
            s.maps[n].push_back(item.map);
            Vector e = l2_normalize(item.embedding);
            std::copy(e.begin(), e.end(), s.pool.image_features.row(r++).begin());
            s.pool.image_labels.push_back(n);
            s.embeddings[n].push_back(std::move(e));
        }
    }

    s.pool.text_features = Matrix(s.episode.text.size(), d);
    std::vector<bool> seen(n_classes, false);
    Matrix class_text(n_classes, d);
    for (std::size_t t = 0; t < s.episode.text.size(); ++t) {
        const BankItem& item = bank.items[s.episode.text[t]];
        const Vector e = l2_normalize(item.embedding);
        std::copy(e.begin(), e.end(), s.pool.text_features.row(t).begin());
        s.pool.text_labels.push_back(item.label);
        if (!seen[item.label]) {
            seen[item.label] = true;
            std::copy(e.begin(), e.end(), class_text.row(item.label).begin());
        }
    }
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        s.class_text = std::move(class_text);
    return s;
}

Projection fit_pipeline_projection(const FeatureBank& bank, const SupportData& support,
                                   const PipelineConfig& cfg) {
    const std::size_t in_dim = bank.map_rows;
    const std::size_t out_dim = std::min(cfg.proj_dim, in_dim);
    if (out_dim == 0) throw DataError("projection dimension must be >= 1");
    // Nothing to reduce: keep channels unmixed so pairwise channel structure survives.
    if (out_dim == in_dim)
        return fit_projection(ProjectionKind::identity, in_dim, in_dim, std::nullopt, cfg.projection_seed());
    std::optional<Matrix> fit_data;
    if (cfg.proj_kind == ProjectionKind::pca) {
        // Every spatial position of every support map is one channel-space sample.
        std::size_t total = 0;
        for (const auto& cls : support.maps) total += cls.size() * bank.map_cols;
        Matrix data(total, in_dim);
        std::size_t r = 0;
        for (const auto& cls : support.maps)
            for (const Matrix& map : cls)
                for (std::size_t p = 0; p < map.cols(); ++p, ++r)
                    for (std::size_t c = 0; c < in_dim; ++c) data(r, c) = map(c, p);
        fit_data = std::move(data);
    }
    return fit_projection(cfg.proj_kind, in_dim, out_dim, fit_data, cfg.projection_seed());
}

PrototypeFile build_prototype_file(const FeatureBank& bank, const Manifest& manifest,
                                   const PipelineConfig& cfg) {
    const SupportData support = load_support(bank, manifest, cfg.shots, cfg.episode_seed());
    PrototypeFile f;
    f.projection = fit_pipeline_projection(bank, support, cfg);
    f.axis = cfg.axis;
    f.episode_seed = cfg.episode_seed();
    f.prototypes = build_prototypes(support.maps, f.projection, cfg.axis);
    return f;
}

TrainOutcome train_checkpoint(const FeatureBank& bank, const Manifest& manifest,
                              const PipelineConfig& cfg, const Projection* projection) {
    const SupportData support = load_support(bank, manifest, cfg.shots, cfg.episode_seed());
    const std::size_t n_classes = manifest.classes.size();

    LinearHead head;
    if (cfg.text_init) {
        if (support.class_text.empty())
            throw DataError("text initialization needs a text: item for every class");
        head = init_from_text(support.class_text);
    } else {
        head = init_random(n_classes, bank.dim, cfg.random_init_seed());
    }

    TrainConfig tcfg = cfg.train;
    tcfg.seed = cfg.train_seed();
    TrainResult trained = train(std::move(head), support.pool, tcfg);

    TrainOutcome out;
    out.epoch_loss = std::move(trained.epoch_loss);
    Checkpoint& c = out.checkpoint;
    c.head = std::move(trained.head);
    c.projection = projection ? *projection : fit_pipeline_projection(bank, support, cfg);
    c.axis = cfg.axis;
    c.fusion = cfg.fusion;
    c.episode_seed = cfg.episode_seed();
    c.train_seed = tcfg.seed;
    c.shots = static_cast<std::uint32_t>(cfg.shots);
    c.text_init = cfg.text_init;
    return out;
}

Model assemble_model(const FeatureBank& bank, const Manifest& manifest, const Checkpoint& ckpt,
                     const PrototypeFile* prototypes) {
    const SupportData support = load_support(bank, manifest, ckpt.shots, ckpt.episode_seed);
    Model model;
    model.head = ckpt.head;
    model.axis = ckpt.axis;
    model.text_features = support.class_text;
    if (prototypes) {
        if (!(prototypes->projection == ckpt.projection) || prototypes->axis != ckpt.axis)
            throw DataError("prototype file was built with a different projection than the checkpoint");
        model.projection = prototypes->projection;
        model.prototypes = prototypes->prototypes;
    } else {
        model.projection = ckpt.projection;
        model.prototypes = build_prototypes(support.maps, model.projection, model.axis);
    }
    if (model.prototypes.num_classes() != model.head.num_classes())
        throw DataError("prototype and head class counts differ");
    return model;
}

std::vector<AblationRow> run_ablation(const FeatureBank& bank, const Manifest& manifest,
                                      const PipelineConfig& cfg, Split split) {
    const std::vector<QueryItem> queries = make_queries(bank, split_indices(bank, manifest, split));
    if (queries.empty()) throw DataError("ablation: no queries in split");

    PipelineConfig no_init = cfg;
    no_init.text_init = false;
    PipelineConfig with_init = cfg;
    with_init.text_init = true;

    const Checkpoint ck_no_init = train_checkpoint(bank, manifest, no_init).checkpoint;
    const Checkpoint ck_init = train_checkpoint(bank, manifest, with_init).checkpoint;

    FusionConfig head_only = cfg.fusion;
    head_only.alpha = 0.0;

    std::vector<AblationRow> rows;
    rows.push_back({kAblationNoInit,
                    evaluate(queries, assemble_model(bank, manifest, ck_no_init), head_only).accuracy});
    const Model full = assemble_model(bank, manifest, ck_init);
    rows.push_back({kAblationInit, evaluate(queries, full, head_only).accuracy});
    rows.push_back({kAblationFull, evaluate(queries, full, cfg.fusion).accuracy});
    return rows;
}

} // namespace bdc
