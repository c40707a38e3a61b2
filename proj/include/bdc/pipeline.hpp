#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bdc/checkpoint.hpp"
#include "bdc/episode.hpp"
#include "bdc/feature_bank.hpp"
#include "bdc/fewshot.hpp"
#include "bdc/head.hpp"
#include "bdc/manifest.hpp"
#include "bdc/reduction.hpp"
#include "bdc/report.hpp"

namespace bdc {

/// End-to-end settings. Stage seeds are derived from `seed` so one number pins a run.
struct PipelineConfig {
    std::size_t shots = 8;
    std::size_t proj_dim = 64; // clamped to the channel count; identity when not reducing
    ProjectionKind proj_kind = ProjectionKind::random_orthogonal;
    ObservationAxis axis = ObservationAxis::channels;
    std::uint64_t seed = 0;
    TrainConfig train; // train.seed is overwritten with the derived seed
    bool text_init = true;
    FusionConfig fusion;

    std::uint64_t episode_seed() const noexcept;
    std::uint64_t projection_seed() const noexcept;
    std::uint64_t train_seed() const noexcept;
    std::uint64_t random_init_seed() const noexcept;
};

/// Support maps and the training pool of one episode.
struct SupportData {
    Episode episode;
    std::vector<std::vector<Matrix>> maps;             // [class][shot]
    std::vector<std::vector<Vector>> embeddings;       // [class][shot], unit norm
    TrainingPool pool;                                 // support images + every text item
    Matrix class_text;                                 // first text item per class; empty if any class lacks one
};

SupportData load_support(const FeatureBank& bank, const Manifest& manifest, std::size_t shots,
                         std::uint64_t episode_seed);

Projection fit_pipeline_projection(const FeatureBank& bank, const SupportData& support,
                                   const PipelineConfig& cfg);

PrototypeFile build_prototype_file(const FeatureBank& bank, const Manifest& manifest,
                                   const PipelineConfig& cfg);

struct TrainOutcome {
    Checkpoint checkpoint;
    std::vector<double> epoch_loss;
};

/// Samples the episode, fits (or reuses) the projection, initializes and trains the head.
TrainOutcome train_checkpoint(const FeatureBank& bank, const Manifest& manifest,
                              const PipelineConfig& cfg, const Projection* projection = nullptr);

/// Rebuilds the inference model. Without a prototype file the prototypes are rebuilt
/// from the checkpoint's episode seed and projection.
Model assemble_model(const FeatureBank& bank, const Manifest& manifest, const Checkpoint& ckpt,
                     const PrototypeFile* prototypes = nullptr);

/// The three component rows: MRN without text init, MRN with text init (both alpha = 0),
/// and MRN + BDC at cfg.fusion.
std::vector<AblationRow> run_ablation(const FeatureBank& bank, const Manifest& manifest,
                                      const PipelineConfig& cfg, Split split = Split::test);

inline constexpr const char* kAblationNoInit = "MRN (w/o init.)";
inline constexpr const char* kAblationInit = "MRN (w/ init.)";
inline constexpr const char* kAblationFull = "MRN + BDC";

} // namespace bdc
