#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bdc/fewshot.hpp"
#include "bdc/head.hpp"
#include "bdc/reduction.hpp"

namespace bdc {

/// Everything needed to rebuild a trained model against its bank.
struct Checkpoint {
    LinearHead head;
    Projection projection;
    ObservationAxis axis = ObservationAxis::channels;
    FusionConfig fusion;
    std::uint64_t episode_seed = 0;
    std::uint64_t train_seed = 0;
    std::uint32_t shots = 0;
    bool text_init = true;

    bool operator==(const Checkpoint&) const = default;
};

/// Prototypes together with the projection and episode they were built from.
struct PrototypeFile {
    PrototypeSet prototypes;
    Projection projection;
    ObservationAxis axis = ObservationAxis::channels;
    std::uint64_t episode_seed = 0;

    bool operator==(const PrototypeFile&) const = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint32_t kPrototypeVersion = 1;

/// Both files share one container: magic | version u32 | payload length u64 | payload
/// | FNV-1a 64 checksum of the payload. Doubles are stored as raw IEEE-754 bits, so
/// round trips are bit-exact. Magic is "BDCK" for checkpoints, "BPRT" for prototypes.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_prototypes(const PrototypeFile& file);
PrototypeFile decode_prototypes(std::span<const std::uint8_t> bytes);
void save_prototypes(const std::filesystem::path& path, const PrototypeFile& file);
PrototypeFile load_prototypes(const std::filesystem::path& path);

} // namespace bdc
