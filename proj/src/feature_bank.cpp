#include "bdc/feature_bank.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "binary_io.hpp"
#include "bdc/errors.hpp"

namespace bdc {

bool is_text_item(const BankItem& item) noexcept { return item.id.rfind("text:", 0) == 0; }

std::vector<std::uint8_t> encode_bank(const FeatureBank& bank) {
    if (bank.map_cols != 0 && bank.map_rows == 0)
        throw DimensionError("encode_bank: maps with zero rows");
    detail::ByteWriter w;
    w.tag("FBNK");
    w.u32(kBankVersion);
    w.u64(bank.items.size());
    w.u32(bank.dim);
    w.u32(bank.map_rows);
    w.u32(bank.map_cols);
    for (const BankItem& item : bank.items) {
        if (item.embedding.size() != bank.dim) {
            throw DimensionError("encode_bank: item '" + item.id + "' has embedding dim " +
                                 std::to_string(item.embedding.size()));
        }
        if (bank.has_maps() &&
            (item.map.rows() != bank.map_rows || item.map.cols() != bank.map_cols)) {
            throw DimensionError("encode_bank: item '" + item.id + "' has map shape " +
                                 std::to_string(item.map.rows()) + "x" +
                                 std::to_string(item.map.cols()));
        }
        // Refuse to write what read_bank would reject.
        if (!all_finite(item.embedding) || std::abs(l2_norm(item.embedding) - 1.0) > kBankNormTolerance)
            throw DataError("encode_bank: item '" + item.id + "' embedding is not unit norm");
        if (!all_finite(item.map.data()))
            throw DataError("encode_bank: item '" + item.id + "' map has non-finite values");
        w.str(item.id);
        w.u32(item.label);
        for (double v : item.embedding) w.f32(static_cast<float>(v));
        if (bank.has_maps())
            for (double v : item.map.data()) w.f32(static_cast<float>(v));
    }
    return std::move(w.bytes());
}

FeatureBank decode_bank(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "FBNK", 4) != 0)
        throw FormatError(FormatErrorKind::bad_magic, 0, "bad magic: expected 'FBNK'");
    r.raw(4);
    const std::uint32_t version = r.u32();
    if (version != kBankVersion) {
        throw FormatError(FormatErrorKind::version_mismatch, 4,
                          "bank version " + std::to_string(version) + ", expected " +
                              std::to_string(kBankVersion));
    }
    const std::uint64_t count = r.u64();
    FeatureBank bank;
    bank.dim = r.u32();
    bank.map_rows = r.u32();
    bank.map_cols = r.u32();
    if (bank.map_cols != 0 && bank.map_rows == 0)
        throw FormatError(FormatErrorKind::malformed, 20, "header declares maps with zero rows");

    const std::uint64_t fixed_per_item =
        8 + 4ull * bank.dim + 4ull * bank.map_rows * bank.map_cols * (bank.has_maps() ? 1 : 0);
    if (count > r.remaining() / fixed_per_item) {
        throw FormatError(FormatErrorKind::truncated, r.offset(),
                          "header declares " + std::to_string(count) +
                              " items, more than the file can hold");
    }
    bank.items.reserve(static_cast<std::size_t>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        BankItem item;
        item.id = r.str();
        item.label = r.u32();
        const std::uint64_t emb_offset = r.offset();
        item.embedding.resize(bank.dim);
        for (double& v : item.embedding) v = r.f32();
        if (bank.dim > 0) {
            const double norm = l2_norm(item.embedding);
            if (!(std::abs(norm - 1.0) <= kBankNormTolerance)) {
                throw FormatError(FormatErrorKind::norm_violation, emb_offset,
                                  "item '" + item.id + "' embedding norm " + std::to_string(norm) +
                                      " at offset " + std::to_string(emb_offset));
            }
        }
        if (bank.has_maps()) {
            item.map = Matrix(bank.map_rows, bank.map_cols);
            for (double& v : item.map.data()) v = r.f32();
        }
        bank.items.push_back(std::move(item));
    }
    if (r.remaining() != 0) {
        throw FormatError(FormatErrorKind::trailing_bytes, r.offset(),
                          std::to_string(r.remaining()) + " trailing bytes after last item");
    }
    return bank;
}

void write_bank(const std::filesystem::path& path, const FeatureBank& bank) {
    detail::write_file_atomic(path, encode_bank(bank));
}

FeatureBank read_bank(const std::filesystem::path& path) {
    return decode_bank(detail::read_file(path));
}

void round_to_storage(FeatureBank& bank) {
    for (BankItem& item : bank.items) {
        for (double& v : item.embedding) v = static_cast<float>(v);
        for (double& v : item.map.data()) v = static_cast<float>(v);
    }
}

} // namespace bdc
