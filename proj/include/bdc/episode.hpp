#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bdc/feature_bank.hpp"
#include "bdc/fewshot.hpp"
#include "bdc/manifest.hpp"

namespace bdc {

/// An M-shot N-way task expressed as indices into a FeatureBank.
struct Episode {
    std::vector<std::string> class_names;
    std::vector<std::vector<std::size_t>> support; // [class] -> M item indices
    std::vector<std::size_t> queries;              // bank order
    std::vector<std::size_t> text;                 // text items, bank order

    std::size_t shots() const noexcept { return support.empty() ? 0 : support.front().size(); }
    bool operator==(const Episode&) const = default;
};

/// Draws `shots` train-split items per class without replacement. Classes are
/// processed in index order, each shuffling its candidates (bank order) with one
/// shared Rng(seed). Queries are every non-text item in `query_split`.
/// Throws DataError if a class has fewer than `shots` train items.
Episode sample_episode(const FeatureBank& bank, const Manifest& manifest, std::size_t shots,
                       std::uint64_t seed, Split query_split = Split::test);

/// Items of one split as evaluation queries (embeddings re-normalized in double).
std::vector<QueryItem> make_queries(const FeatureBank& bank, const std::vector<std::size_t>& indices);
std::vector<std::size_t> split_indices(const FeatureBank& bank, const Manifest& manifest, Split split);

} // namespace bdc
