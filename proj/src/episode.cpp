#include "bdc/episode.hpp"

#include <string>

#include "bdc/errors.hpp"
#include "bdc/rng.hpp"

namespace bdc {

std::vector<std::size_t> split_indices(const FeatureBank& bank, const Manifest& manifest,
                                       Split split) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bank.items.size(); ++i) {
        const BankItem& item = bank.items[i];
        if (is_text_item(item)) continue;
        const auto it = manifest.splits.find(item.id);
        if (it != manifest.splits.end() && it->second == split) out.push_back(i);
    }
    return out;
}

Episode sample_episode(const FeatureBank& bank, const Manifest& manifest, std::size_t shots,
                       std::uint64_t seed, Split query_split) {
    if (shots == 0) throw DataError("sample_episode: shots must be >= 1");
    const std::size_t n_classes = manifest.classes.size();
    if (n_classes == 0) throw DataError("sample_episode: manifest has no classes");

    std::vector<std::vector<std::size_t>> candidates(n_classes);
    for (std::size_t i : split_indices(bank, manifest, Split::train)) {
        const std::uint32_t label = bank.items[i].label;
        if (label >= n_classes) throw DataError("sample_episode: label out of range");
        candidates[label].push_back(i);
    }

    Episode ep;
    ep.class_names = manifest.classes;
    Rng rng(seed);
    for (std::size_t n = 0; n < n_classes; ++n) {
        auto& pool = candidates[n];
        if (pool.size() < shots) {
            throw DataError("sample_episode: class '" + manifest.classes[n] + "' has " +
                            std::to_string(pool.size()) + " train items, need " +
                            std::to_string(shots));
        }
        rng.shuffle(std::span<std::size_t>(pool));
        ep.support.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(shots));
    }
    ep.queries = split_indices(bank, manifest, query_split);
    for (std::size_t i = 0; i < bank.items.size(); ++i)
        if (is_text_item(bank.items[i])) ep.text.push_back(i);
    return ep;
}

std::vector<QueryItem> make_queries(const FeatureBank& bank, const std::vector<std::size_t>& indices) {
    std::vector<QueryItem> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        const BankItem& item = bank.items.at(i);
        out.push_back(QueryItem{item.id, item.label, l2_normalize(item.embedding), item.map});
    }
    return out;
}

} // namespace bdc
