#include "binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <system_error>

#include "bdc/errors.hpp"

namespace bdc::detail {

void ByteWriter::u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::tag(const char (&magic)[5]) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(magic[i]));
}

void ByteWriter::str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    for (char c : s) bytes_.push_back(static_cast<std::uint8_t>(c));
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
    if (n > remaining()) {
        throw FormatError(FormatErrorKind::truncated, offset(),
                          "truncated input: need " + std::to_string(n) + " bytes at offset " +
                              std::to_string(offset()) + ", have " + std::to_string(remaining()));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint32_t ByteReader::u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t ByteReader::u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
    const std::uint32_t n = u32();
    const auto b = take(n);
    return std::string(reinterpret_cast<const char*>(b.data()), b.size());
}

std::span<const std::uint8_t> ByteReader::raw(std::size_t n) { return take(n); }

std::uint64_t fnv1a64(std::span<const std::uint8_t> data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::io, 0, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw FormatError(FormatErrorKind::io, 0, "read failed on '" + path.string() + "'");
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError(FormatErrorKind::io, 0, "cannot create '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw FormatError(FormatErrorKind::io, 0, "write failed on '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw FormatError(FormatErrorKind::io, 0, "cannot rename onto '" + path.string() + "'");
    }
}

std::vector<std::uint8_t> seal(const char (&magic)[5], std::uint32_t version,
                               std::vector<std::uint8_t> payload) {
    ByteWriter w;
    w.tag(magic);
    w.u32(version);
    w.u64(payload.size());
    w.raw(payload);
    w.u64(fnv1a64(payload));
    return std::move(w.bytes());
}

std::span<const std::uint8_t> unseal(std::span<const std::uint8_t> file, const char (&magic)[5],
                                     std::uint32_t version, std::uint64_t& payload_offset) {
    ByteReader r(file);
    const auto tag = r.raw(4);
    if (std::memcmp(tag.data(), magic, 4) != 0) {
        throw FormatError(FormatErrorKind::bad_magic, 0,
                          std::string("bad magic: expected '") + magic + "'");
    }
    const std::uint32_t found = r.u32();
    if (found != version) {
        throw FormatError(FormatErrorKind::version_mismatch, 4,
                          "version mismatch: file has " + std::to_string(found) + ", expected " +
                              std::to_string(version));
    }
    const std::uint64_t length = r.u64();
    if (length > r.remaining()) {
        throw FormatError(FormatErrorKind::truncated, r.offset(),
                          "truncated payload: header declares " + std::to_string(length) + " bytes");
    }
    payload_offset = r.offset();
    const auto payload = r.raw(static_cast<std::size_t>(length));
    const std::uint64_t stored = r.u64();
    if (r.remaining() != 0) {
        throw FormatError(FormatErrorKind::trailing_bytes, r.offset(),
                          std::to_string(r.remaining()) + " trailing bytes after checksum");
    }
    if (stored != fnv1a64(payload)) {
        throw FormatError(FormatErrorKind::checksum_mismatch, payload_offset,
                          "payload checksum mismatch");
    }
    return payload;
}

} // namespace bdc::detail
