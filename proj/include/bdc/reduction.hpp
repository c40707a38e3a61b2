#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "bdc/linalg.hpp"

namespace bdc {

enum class ProjectionKind : std::uint8_t {
    random_orthogonal = 0,
    pca = 1,
    identity = 2,
};

const char* to_string(ProjectionKind kind) noexcept;
ProjectionKind parse_projection_kind(const std::string& name);

/// Fixed channel-reduction map (a 1x1 convolution with frozen weights).
/// `weights` is out_dim x in_dim; applied to every observation column.
struct Projection {
    ProjectionKind kind = ProjectionKind::random_orthogonal;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Matrix weights;
    std::uint64_t seed = 0;

    bool operator==(const Projection&) const = default;
};

/// identity: in_dim == out_dim, weights = I (no reduction needed).
/// random_orthogonal: Gram-Schmidt on the rows of a seeded Gaussian matrix.
/// pca: top out_dim principal directions of the mean-centered rows of `fit_data`
/// (n x in_dim, n >= out_dim), sign-fixed so the largest-magnitude component is positive.
Projection fit_projection(ProjectionKind kind, std::size_t in_dim, std::size_t out_dim,
                          const std::optional<Matrix>& fit_data, std::uint64_t seed);

/// weights * obs for a k x m map with k == in_dim.
Matrix project(const Projection& p, const Matrix& obs);

} // namespace bdc
