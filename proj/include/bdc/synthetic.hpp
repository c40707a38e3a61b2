#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "bdc/feature_bank.hpp"
#include "bdc/manifest.hpp"

namespace bdc {

/// Synthetic benchmark whose class identity lives in *which* channels depend on
/// which, not in any channel's marginal distribution.
///
/// Channels [0, h) are sources drawn from U(0,1), channels [h, 2h) are targets
/// (h = channels / 2; an odd leftover channel is independent U(0,1) noise). Every
/// class owns a distinct pairing: target h+j = source[pairing[j]]^2 + noise * N(0,1).
/// Marginals therefore match across classes. The global embedding is the
/// normalized vector (channel means - expected channel means) + embedding_signal * u_y,
/// with u_y orthonormal class directions; text items carry u_y itself.
struct SynthSpec {
    std::size_t classes = 4;
    std::size_t shots = 8;        // train items generated per class
    std::size_t queries = 200;    // test items, labels cycle through the classes
    std::size_t val_queries = 100;
    std::size_t channels = 16;
    std::size_t positions = 32;
    double noise = 0.1;
    double embedding_signal = 0.05;
    std::uint64_t seed = 7;
};

struct SyntheticData {
    FeatureBank bank;
    Manifest manifest;
    /// [class][j] = source channel feeding target channel h + j.
    std::vector<std::vector<std::size_t>> pairings;
};

/// Deterministic in spec.seed. Values are rounded to float so that the bank
/// survives a write/read cycle unchanged. Throws DataError when the channel count
/// cannot give every class its own pairing.
SyntheticData generate_synthetic(const SynthSpec& spec);

} // namespace bdc
