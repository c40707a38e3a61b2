#include "bdc/bdc_metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bdc/errors.hpp"

namespace bdc {

DistanceMatrix distance_matrix(const Matrix& obs) {
    const std::size_t k = obs.rows();
    const std::size_t m = obs.cols();
    if (m < 2) {
        throw DimensionError("distance_matrix: need at least 2 observation columns, got " +
                             std::to_string(m));
    }
    if (!all_finite(obs.data())) throw DegenerateInput("distance_matrix: non-finite input");

    // Gram matrix of the columns, G = obs^T obs.
    Matrix gram(m, m);
    for (std::size_t r = 0; r < k; ++r) {
        const auto row = obs.row(r);
        for (std::size_t i = 0; i < m; ++i) {
            const double a = row[i];
            if (a == 0.0) continue;
            for (std::size_t j = i; j < m; ++j) gram(i, j) += a * row[j];
        }
    }

    DistanceMatrix d{Matrix(m, m)};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double sq = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
            const double dist = std::sqrt(std::max(sq, 0.0));
            d.values(i, j) = dist;
            d.values(j, i) = dist;
        }
    }
    return d;
}

BdcMatrix double_center(const DistanceMatrix& d) {
    const std::size_t m = d.values.rows();
    if (d.values.cols() != m) throw DimensionError("double_center: distance matrix not square");
    if (m == 0) throw DimensionError("double_center: empty distance matrix");
    if (!all_finite(d.values.data())) throw DegenerateInput("double_center: non-finite input");
    for (std::size_t i = 0; i < m; ++i) {
        if (d.values(i, i) != 0.0) throw DegenerateInput("double_center: non-zero diagonal");
        for (std::size_t j = 0; j < m; ++j) {
            if (d.values(i, j) < 0.0) throw DegenerateInput("double_center: negative distance");
        }
    }

    const double inv_m = 1.0 / static_cast<double>(m);
    Vector row_mean(m, 0.0), col_mean(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = d.values(i, j);
            row_mean[i] += v;
            col_mean[j] += v;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        grand += row_mean[i];
        row_mean[i] *= inv_m;
        col_mean[i] *= inv_m;
    }
    grand *= inv_m * inv_m;

    BdcMatrix r{Matrix(m, m), false};
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            r.values(i, j) = d.values(i, j) - row_mean[i] - col_mean[j] + grand;
    return r;
}

BdcMatrix bdc_matrix(const Matrix& obs, bool normalize) {
    BdcMatrix r = double_center(distance_matrix(obs));
    if (!normalize) return r;
    const double norm = frobenius_norm(r.values);
    if (!(norm > 0.0)) {
        throw DegenerateInput("bdc_matrix: all observations coincide, cannot normalize");
    }
    for (double& v : r.values.data()) v /= norm;
    r.normalized = true;
    return r;
}

double bdc_measure(const BdcMatrix& rt, const BdcMatrix& rs) {
    if (rt.values.rows() != rs.values.rows() || rt.values.cols() != rs.values.cols()) {
        throw DimensionError("bdc_measure: sizes " + std::to_string(rt.size()) + " and " +
                             std::to_string(rs.size()));
    }
    if (rt.normalized || rs.normalized) {
        throw std::invalid_argument("bdc_measure: defined on unnormalized BDC matrices");
    }
    // tr(A^T B) = sum_kl A_kl B_kl.
    return dot(rt.values.data(), rs.values.data());
}

} // namespace bdc
