#include "bdc/manifest.hpp"

#include <set>
#include <stdexcept>

#include "binary_io.hpp"
#include "bdc/errors.hpp"
#include "json.hpp"

namespace bdc {

using nlohmann::json;

const char* to_string(Split split) noexcept {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "unknown";
}

Split parse_split(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "val") return Split::val;
    if (name == "test") return Split::test;
    throw std::invalid_argument("unknown split '" + name + "'");
}

std::string encode_manifest(const Manifest& manifest) {
    json splits = json::object();
    for (const auto& [id, split] : manifest.splits) splits[id] = to_string(split);
    const json doc = {
        {"format", "bdc-manifest"},
        {"version", 1},
        {"classes", manifest.classes},
        {"prompts", manifest.prompts},
        {"splits", splits},
    };
    return doc.dump(2) + "\n";
}

Manifest decode_manifest(const std::string& text) {
    try {
        const json doc = json::parse(text);
        if (doc.value("format", "") != "bdc-manifest")
            throw FormatError(FormatErrorKind::bad_magic, 0, "manifest: missing format tag");
        if (doc.value("version", 0) != 1)
            throw FormatError(FormatErrorKind::version_mismatch, 0, "manifest: unsupported version");
        Manifest m;
        m.classes = doc.at("classes").get<std::vector<std::string>>();
        m.prompts = doc.value("prompts", std::vector<std::string>{});
        for (const auto& [id, split] : doc.at("splits").items())
            m.splits[id] = parse_split(split.get<std::string>());
        return m;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(FormatErrorKind::malformed, 0, std::string("manifest: ") + e.what());
    }
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    const std::string text = encode_manifest(manifest);
    detail::write_file_atomic(
        path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Manifest read_manifest(const std::filesystem::path& path) {
    const auto bytes = detail::read_file(path);
    return decode_manifest(std::string(bytes.begin(), bytes.end()));
}

void validate_manifest(const Manifest& manifest, const FeatureBank& bank) {
    if (manifest.classes.empty()) throw DataError("manifest: no classes");
    std::set<std::string> ids;
    for (const BankItem& item : bank.items) {
        if (!ids.insert(item.id).second) throw DataError("bank: duplicate id '" + item.id + "'");
        if (item.label >= manifest.classes.size()) {
            throw DataError("bank: item '" + item.id + "' has label " + std::to_string(item.label) +
                            " but manifest lists " + std::to_string(manifest.classes.size()) +
                            " classes");
        }
    }
    for (const auto& [id, split] : manifest.splits) {
        if (!ids.contains(id)) throw DataError("manifest: split id '" + id + "' not in bank");
    }
}

} // namespace bdc
