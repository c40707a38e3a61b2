#include "bdc/reduction.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

#include "bdc/errors.hpp"
#include "bdc/rng.hpp"

namespace bdc {

const char* to_string(ProjectionKind kind) noexcept {
    switch (kind) {
    case ProjectionKind::random_orthogonal: return "random-orthogonal";
    case ProjectionKind::pca: return "pca";
    case ProjectionKind::identity: return "identity";
    }
    return "unknown";
}

ProjectionKind parse_projection_kind(const std::string& name) {
    if (name == "random-orthogonal" || name == "orthogonal") return ProjectionKind::random_orthogonal;
    if (name == "pca") return ProjectionKind::pca;
    if (name == "identity") return ProjectionKind::identity;
    throw std::invalid_argument("unknown projection kind '" + name + "'");
}

namespace {

Matrix random_orthonormal_rows(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix w(rows, cols);
    for (double& v : w.data()) v = rng.normal();
    for (std::size_t i = 0; i < rows; ++i) {
        auto ri = w.row(i);
        // Two passes of modified Gram-Schmidt keep orthogonality near machine precision.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                const auto rj = w.row(j);
                const double proj = dot(ri, rj);
                for (std::size_t c = 0; c < cols; ++c) ri[c] -= proj * rj[c];
            }
        }
        const double n = l2_norm(ri);
        if (!(n > 1e-10)) throw NumericalError("fit_projection: rank-deficient Gaussian draw");
        for (double& v : ri) v /= n;
    }
    return w;
}

Matrix principal_directions(const Matrix& data, std::size_t out_dim) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    Eigen::MatrixXd centered(n, d);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += data(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) centered(i, j) = data(i, j) - mean;
    }
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("fit_projection: eigensolver failed");

    // Eigenvalues come out ascending; take the last out_dim columns in reverse.
    Matrix w(out_dim, d);
    for (std::size_t r = 0; r < out_dim; ++r) {
        const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(d - 1 - r));
        std::size_t arg = 0;
        for (std::size_t c = 1; c < d; ++c)
            if (std::abs(col(c)) > std::abs(col(arg))) arg = c;
        const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < d; ++c) w(r, c) = sign * col(c);
    }
    return w;
}

} // namespace

Projection fit_projection(ProjectionKind kind, std::size_t in_dim, std::size_t out_dim,
                          const std::optional<Matrix>& fit_data, std::uint64_t seed) {
    if (in_dim == 0 || out_dim == 0) throw DimensionError("fit_projection: zero dimension");
    if (out_dim > in_dim) {
        throw DimensionError("fit_projection: out_dim " + std::to_string(out_dim) +
                             " exceeds in_dim " + std::to_string(in_dim));
    }
    Projection p;
    p.kind = kind;
    p.in_dim = in_dim;
    p.out_dim = out_dim;
    p.seed = seed;

    if (kind == ProjectionKind::identity) {
        if (out_dim != in_dim) throw DimensionError("fit_projection: identity needs out_dim == in_dim");
        p.weights = Matrix::identity(in_dim);
        return p;
    }
    if (kind == ProjectionKind::random_orthogonal) {
        Rng rng(seed);
        p.weights = random_orthonormal_rows(out_dim, in_dim, rng);
        return p;
    }

    if (!fit_data) throw DataError("fit_projection: pca requires fit data");
    if (fit_data->cols() != in_dim) {
        throw DimensionError("fit_projection: fit data has " + std::to_string(fit_data->cols()) +
                             " columns, expected " + std::to_string(in_dim));
    }
    if (fit_data->rows() < out_dim || fit_data->rows() < 2) {
        throw DataError("fit_projection: pca needs at least out_dim (and 2) samples, got " +
                        std::to_string(fit_data->rows()));
    }
    p.weights = principal_directions(*fit_data, out_dim);
    return p;
}

Matrix project(const Projection& p, const Matrix& obs) {
    if (obs.rows() != p.in_dim) {
        throw DimensionError("project: map has " + std::to_string(obs.rows()) +
                             " channels, projection expects " + std::to_string(p.in_dim));
    }
    return matmul(p.weights, obs);
}

} // namespace bdc
