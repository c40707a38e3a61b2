#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bdc {

/// Operand shapes do not agree (matrix products, head/feature dims, label ranges).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but degenerate: zero-norm vectors, coincident observations,
/// constant samples, non-finite entries.
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Training produced a non-finite loss or weights.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dataset-level problems: missing ids, too few items per class, bad configuration.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FormatErrorKind {
    io,
    bad_magic,
    version_mismatch,
    truncated,
    trailing_bytes,
    norm_violation,
    checksum_mismatch,
    malformed,
};

const char* to_string(FormatErrorKind kind) noexcept;

/// Binary/text persistence failure. `offset` is the byte offset at which the
/// problem was detected (0 for whole-file conditions).
class FormatError : public std::runtime_error {
public:
    FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& what);

    FormatErrorKind kind() const noexcept { return kind_; }
    std::uint64_t offset() const noexcept { return offset_; }

private:
    FormatErrorKind kind_;
    std::uint64_t offset_;
};

} // namespace bdc
