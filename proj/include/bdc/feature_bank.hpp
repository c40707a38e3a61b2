#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bdc/linalg.hpp"

namespace bdc {

/// One stored sample. Text features are ordinary items whose id starts with "text:";
/// their label is the class they describe.
struct BankItem {
    std::string id;
    std::uint32_t label = 0;
    Vector embedding; // dim entries, unit norm
    Matrix map;       // map_rows x map_cols, empty when the bank carries no maps

    bool operator==(const BankItem&) const = default;
};

/// Offline collection of encoder outputs.
///
/// File layout (all little-endian):
///   "FBNK" | version u32 | item count u64 | dim u32 | map rows u32 | map cols u32
///   then per item:
///   id length u32 | id UTF-8 bytes | label u32 | dim x f32 embedding
///   | map rows x map cols f32, row-major (only when map cols != 0)
/// Values are held as doubles in memory and rounded to float on write.
struct FeatureBank {
    std::uint32_t dim = 0;
    std::uint32_t map_rows = 0;
    std::uint32_t map_cols = 0;
    std::vector<BankItem> items;

    bool has_maps() const noexcept { return map_cols != 0; }
    bool operator==(const FeatureBank&) const = default;
};

inline constexpr std::uint32_t kBankVersion = 1;
inline constexpr double kBankNormTolerance = 1e-5;

bool is_text_item(const BankItem& item) noexcept;

std::vector<std::uint8_t> encode_bank(const FeatureBank& bank);
/// Throws FormatError: bad_magic, version_mismatch, truncated, trailing_bytes,
/// norm_violation (offset of the offending embedding) or malformed.
FeatureBank decode_bank(std::span<const std::uint8_t> bytes);

void write_bank(const std::filesystem::path& path, const FeatureBank& bank);
FeatureBank read_bank(const std::filesystem::path& path);

/// Rounds every stored value to float precision, matching what a write/read cycle yields.
void round_to_storage(FeatureBank& bank);

} // namespace bdc
