#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace bdc {

/// Seeded random source shared by every module.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so all
/// derived draws are computed here:
///   - uniform():  top 53 bits of one engine output, scaled to [0, 1)
///   - normal():   Marsaglia polar method, second variate cached
///   - index(n):   rejection sampling on the engine output (unbiased)
///   - shuffle():  Fisher-Yates from the back, using index()
/// There is no global instance; pass an Rng by reference where randomness is needed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(values[i - 1], values[j]);
        }
    }

    /// Derives an independent child seed; used to give sub-tasks their own streams.
    std::uint64_t fork_seed() { return next_u64() ^ 0x9e3779b97f4a7c15ULL; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// SplitMix64 finalizer of seed + stream; gives each pipeline stage its own seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

} // namespace bdc
