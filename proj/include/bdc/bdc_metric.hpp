#pragma once

#include <cstddef>

#include "bdc/linalg.hpp"

namespace bdc {

/// Pairwise Euclidean distances between the m observation columns of a k x m map.
struct DistanceMatrix {
    Matrix values;

    std::size_t size() const noexcept { return values.rows(); }
};

/// Double-centered distance matrix. `normalized` records whether it was scaled
/// to unit Frobenius norm.
struct BdcMatrix {
    Matrix values;
    bool normalized = false;

    std::size_t size() const noexcept { return values.rows(); }
};

/// Distances between columns of `obs`, via |t_i|^2 + |t_j|^2 - 2 t_i.t_j clamped at 0
/// before the square root. Requires at least two columns and finite entries.
DistanceMatrix distance_matrix(const Matrix& obs);

/// r_kl = d_kl - colmean_l - rowmean_k + grandmean. Output is unnormalized.
BdcMatrix double_center(const DistanceMatrix& d);

/// double_center(distance_matrix(obs)), optionally scaled to unit Frobenius norm.
/// Normalizing a zero matrix (all observations coincident) throws DegenerateInput.
BdcMatrix bdc_matrix(const Matrix& obs, bool normalize);

/// tr(R_t^T R_s) on unnormalized BDC matrices of equal size. No 1/m^2 factor:
/// this equals m^2 times the classical V-statistic squared distance covariance.
double bdc_measure(const BdcMatrix& rt, const BdcMatrix& rs);

} // namespace bdc
