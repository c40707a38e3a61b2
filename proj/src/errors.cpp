#include "bdc/errors.hpp"

namespace bdc {

const char* to_string(FormatErrorKind kind) noexcept {
    switch (kind) {
    case FormatErrorKind::io: return "io";
    case FormatErrorKind::bad_magic: return "bad_magic";
    case FormatErrorKind::version_mismatch: return "version_mismatch";
    case FormatErrorKind::truncated: return "truncated";
    case FormatErrorKind::trailing_bytes: return "trailing_bytes";
    case FormatErrorKind::norm_violation: return "norm_violation";
    case FormatErrorKind::checksum_mismatch: return "checksum_mismatch";
    case FormatErrorKind::malformed: return "malformed";
    }
    return "unknown";
}

FormatError::FormatError(FormatErrorKind kind, std::uint64_t offset, const std::string& what)
    : std::runtime_error(what), kind_(kind), offset_(offset) {}

} // namespace bdc
