#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace bdc::detail {

/// Little-endian encoder.
class ByteWriter {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f32(float v);
    void f64(double v);
    void raw(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
    void tag(const char (&magic)[5]);
    /// u32 length prefix followed by the bytes.
    void str(const std::string& s);

    std::size_t size() const noexcept { return bytes_.size(); }
    std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Little-endian decoder. Every read past the end throws FormatError(truncated)
/// carrying the absolute offset of the failed read.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data, std::uint64_t base_offset = 0)
        : data_(data), base_(base_offset) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    std::string str();
    std::span<const std::uint8_t> raw(std::size_t n);

    std::uint64_t offset() const noexcept { return base_ + pos_; }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
    std::span<const std::uint8_t> take(std::size_t n);

    std::span<const std::uint8_t> data_;
    std::uint64_t base_ = 0;
    std::size_t pos_ = 0;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) noexcept;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Container used by checkpoint and prototype files:
///   magic[4] | version u32 | payload length u64 | payload | FNV-1a 64 of payload
std::vector<std::uint8_t> seal(const char (&magic)[5], std::uint32_t version,
                               std::vector<std::uint8_t> payload);
/// Validates magic, version, length and checksum; returns the payload span and
/// its absolute file offset.
std::span<const std::uint8_t> unseal(std::span<const std::uint8_t> file, const char (&magic)[5],
                                     std::uint32_t version, std::uint64_t& payload_offset);

} // namespace bdc::detail
