#include "bdc/checkpoint.hpp"

#include <string>

#include "binary_io.hpp"
#include "bdc/errors.hpp"

namespace bdc {
namespace {

void put_matrix(detail::ByteWriter& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) w.f64(v);
}

Matrix get_matrix(detail::ByteReader& r) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
    if (n > r.remaining() / 8) {
        throw FormatError(FormatErrorKind::malformed, r.offset(),
                          "matrix " + std::to_string(rows) + "x" + std::to_string(cols) +
                              " exceeds payload");
    }
    Matrix m(rows, cols);
    for (double& v : m.data()) v = r.f64();
    return m;
}

void put_projection(detail::ByteWriter& w, const Projection& p) {
    w.u8(static_cast<std::uint8_t>(p.kind));
    w.u32(static_cast<std::uint32_t>(p.in_dim));
    w.u32(static_cast<std::uint32_t>(p.out_dim));
    w.u64(p.seed);
    put_matrix(w, p.weights);
}

Projection get_projection(detail::ByteReader& r) {
    Projection p;
    const std::uint64_t at = r.offset();
    const std::uint8_t kind = r.u8();
    if (kind > static_cast<std::uint8_t>(ProjectionKind::identity))
        throw FormatError(FormatErrorKind::malformed, at, "unknown projection kind");
    p.kind = static_cast<ProjectionKind>(kind);
    p.in_dim = r.u32();
    p.out_dim = r.u32();
    p.seed = r.u64();
    p.weights = get_matrix(r);
    if (p.weights.rows() != p.out_dim || p.weights.cols() != p.in_dim)
        throw FormatError(FormatErrorKind::malformed, at, "projection weights disagree with dims");
    return p;
}

ObservationAxis get_axis(detail::ByteReader& r) {
    const std::uint64_t at = r.offset();
    const std::uint8_t axis = r.u8();
    if (axis > static_cast<std::uint8_t>(ObservationAxis::positions))
        throw FormatError(FormatErrorKind::malformed, at, "unknown observation axis");
    return static_cast<ObservationAxis>(axis);
}

void expect_consumed(const detail::ByteReader& r) {
    if (r.remaining() != 0)
        throw FormatError(FormatErrorKind::malformed, r.offset(), "unparsed bytes in payload");
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    detail::ByteWriter w;
    put_matrix(w, ckpt.head.weights);
    put_projection(w, ckpt.projection);
    w.u8(static_cast<std::uint8_t>(ckpt.axis));
    w.f64(ckpt.fusion.alpha);
    w.f64(ckpt.fusion.delta);
    w.f64(ckpt.fusion.tau);
    w.u64(ckpt.episode_seed);
    w.u64(ckpt.train_seed);
    w.u32(ckpt.shots);
    w.u8(ckpt.text_init ? 1 : 0);
    return detail::seal("BDCK", kCheckpointVersion, std::move(w.bytes()));
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    std::uint64_t base = 0;
    const auto payload = detail::unseal(bytes, "BDCK", kCheckpointVersion, base);
    detail::ByteReader r(payload, base);
    Checkpoint c;
    c.head.weights = get_matrix(r);
    c.projection = get_projection(r);
    c.axis = get_axis(r);
    c.fusion.alpha = r.f64();
    c.fusion.delta = r.f64();
    c.fusion.tau = r.f64();
    c.episode_seed = r.u64();
    c.train_seed = r.u64();
    c.shots = r.u32();
    c.text_init = r.u8() != 0;
    expect_consumed(r);
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    detail::write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(detail::read_file(path));
}

std::vector<std::uint8_t> encode_prototypes(const PrototypeFile& file) {
    detail::ByteWriter w;
    w.u32(static_cast<std::uint32_t>(file.prototypes.side));
    w.u32(static_cast<std::uint32_t>(file.prototypes.shots));
    put_matrix(w, file.prototypes.prototypes);
    put_projection(w, file.projection);
    w.u8(static_cast<std::uint8_t>(file.axis));
    w.u64(file.episode_seed);
    return detail::seal("BPRT", kPrototypeVersion, std::move(w.bytes()));
}

PrototypeFile decode_prototypes(std::span<const std::uint8_t> bytes) {
    std::uint64_t base = 0;
    const auto payload = detail::unseal(bytes, "BPRT", kPrototypeVersion, base);
    detail::ByteReader r(payload, base);
    PrototypeFile f;
    f.prototypes.side = r.u32();
    f.prototypes.shots = r.u32();
    f.prototypes.prototypes = get_matrix(r);
    if (f.prototypes.prototypes.cols() != f.prototypes.side * f.prototypes.side)
        throw FormatError(FormatErrorKind::malformed, base, "prototype width disagrees with side");
    f.projection = get_projection(r);
    f.axis = get_axis(r);
    f.episode_seed = r.u64();
    expect_consumed(r);
    return f;
}

void save_prototypes(const std::filesystem::path& path, const PrototypeFile& file) {
    detail::write_file_atomic(path, encode_prototypes(file));
}

PrototypeFile load_prototypes(const std::filesystem::path& path) {
    return decode_prototypes(detail::read_file(path));
}

} // namespace bdc
