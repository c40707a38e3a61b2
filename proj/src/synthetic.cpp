#include "bdc/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>

#include "bdc/errors.hpp"
#include "bdc/reduction.hpp"
#include "bdc/rng.hpp"

namespace bdc {
namespace {

std::string padded(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix, i);
    return buf;
}

// Saturating h!, enough to compare against a class count.
std::size_t factorial_capped(std::size_t h, std::size_t cap) {
    std::size_t f = 1;
    for (std::size_t i = 2; i <= h && f < cap; ++i) f *= i;
    return f;
}

std::vector<std::vector<std::size_t>> draw_pairings(std::size_t classes, std::size_t h, Rng& rng) {
    std::vector<std::size_t> identity(h);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> out;

    if (h <= 6) {
        // Few enough permutations to enumerate; take a shuffled prefix.
        std::vector<std::vector<std::size_t>> all;
        std::vector<std::size_t> perm = identity;
        do {
            all.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        rng.shuffle(std::span<std::vector<std::size_t>>(all));
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(classes));
        return out;
    }

    std::set<std::vector<std::size_t>> seen;
    while (out.size() < classes) {
        std::vector<std::size_t> perm = identity;
        rng.shuffle(std::span<std::size_t>(perm));
        if (seen.insert(perm).second) out.push_back(std::move(perm));
    }
    return out;
}

Matrix class_directions(std::size_t classes, std::size_t dim, std::uint64_t seed) {
    if (classes <= dim) {
        return fit_projection(ProjectionKind::random_orthogonal, dim, classes, std::nullopt, seed)
            .weights;
    }
    Rng rng(seed);
    Matrix u(classes, dim);
    for (std::size_t n = 0; n < classes; ++n) {
        auto row = u.row(n);
        for (double& v : row) v = rng.normal();
        const Vector unit = l2_normalize(row);
        std::copy(unit.begin(), unit.end(), row.begin());
    }
    return u;
}

} // namespace

SyntheticData generate_synthetic(const SynthSpec& spec) {
    if (spec.classes == 0 || spec.shots == 0 || spec.channels == 0 || spec.positions == 0)
        throw DataError("generate_synthetic: counts must be >= 1");
    if (!(spec.noise >= 0.0)) throw DataError("generate_synthetic: noise must be >= 0");
    const std::size_t h = spec.channels / 2;
    if (h == 0 || factorial_capped(h, spec.classes) < spec.classes) {
        throw DataError("generate_synthetic: " + std::to_string(spec.channels) +
                        " channels cannot give " + std::to_string(spec.classes) +
                        " classes distinct pairings");
    }

    Rng rng(spec.seed);
    SyntheticData out;
    out.pairings = draw_pairings(spec.classes, h, rng);
    const std::size_t k = spec.channels;
    const std::size_t m = spec.positions;
    const Matrix directions = class_directions(spec.classes, k, derive_seed(spec.seed, 1));

    Vector expected_mean(k, 0.5);
    for (std::size_t j = 0; j < h; ++j) expected_mean[h + j] = 1.0 / 3.0;

    FeatureBank& bank = out.bank;
    bank.dim = static_cast<std::uint32_t>(k);
    bank.map_rows = static_cast<std::uint32_t>(k);
    bank.map_cols = static_cast<std::uint32_t>(m);

    Manifest& manifest = out.manifest;
    manifest.prompts = {"a photo of a"};
    for (std::size_t n = 0; n < spec.classes; ++n) manifest.classes.push_back("class_" + std::to_string(n));

    for (std::size_t n = 0; n < spec.classes; ++n) {
        const auto row = directions.row(n);
        bank.items.push_back(BankItem{"text:" + manifest.classes[n], static_cast<std::uint32_t>(n),
                                      Vector(row.begin(), row.end()), Matrix(k, m)});
    }

    auto make_item = [&](std::string id, std::size_t label) {
        Matrix map(k, m);
        const auto& pairing = out.pairings[label];
        for (std::size_t p = 0; p < m; ++p) {
            for (std::size_t j = 0; j < h; ++j) map(j, p) = rng.uniform();
            for (std::size_t j = 0; j < h; ++j) {
                const double x = map(pairing[j], p);
                map(h + j, p) = x * x + spec.noise * rng.normal();
            }
            for (std::size_t j = 2 * h; j < k; ++j) map(j, p) = rng.uniform();
        }
        Vector e(k);
        for (std::size_t c = 0; c < k; ++c) {
            double mean = 0.0;
            for (std::size_t p = 0; p < m; ++p) mean += map(c, p);
            mean /= static_cast<double>(m);
            e[c] = mean - expected_mean[c] + spec.embedding_signal * directions(label, c);
        }
        bank.items.push_back(BankItem{std::move(id), static_cast<std::uint32_t>(label),
                                      l2_normalize(e), std::move(map)});
    };

    std::size_t counter = 0;
    for (std::size_t n = 0; n < spec.classes; ++n) {
        for (std::size_t s = 0; s < spec.shots; ++s) {
            std::string id = padded("train/", counter++);
            manifest.splits[id] = Split::train;
            make_item(std::move(id), n);
        }
    }
    for (std::size_t i = 0; i < spec.val_queries; ++i) {
        std::string id = padded("val/", i);
        manifest.splits[id] = Split::val;
        make_item(std::move(id), i % spec.classes);
    }
    for (std::size_t i = 0; i < spec.queries; ++i) {
        std::string id = padded("test/", i);
        manifest.splits[id] = Split::test;
        make_item(std::move(id), i % spec.classes);
    }

    round_to_storage(bank);
    return out;
}

} // namespace bdc
