#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bdc/feature_bank.hpp"

namespace bdc {

enum class Split {
    train,
    val,
    test,
};

const char* to_string(Split split) noexcept;
Split parse_split(const std::string& name);

/// Human-readable companion of a FeatureBank (JSON on disk):
///   {"format": "bdc-manifest", "version": 1, "classes": [...],
///    "prompts": [...], "splits": {"<item id>": "train" | "val" | "test", ...}}
struct Manifest {
    std::vector<std::string> classes; // index-ordered
    std::vector<std::string> prompts;
    std::map<std::string, Split> splits;

    bool operator==(const Manifest&) const = default;
};

std::string encode_manifest(const Manifest& manifest);
/// Throws FormatError(malformed) on bad JSON or schema violations.
Manifest decode_manifest(const std::string& text);

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Every split id names a bank item and every label indexes a class. Throws DataError.
void validate_manifest(const Manifest& manifest, const FeatureBank& bank);

} // namespace bdc
