#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bdc/linalg.hpp"
#include "bdc/rng.hpp"

namespace testing {

using bdc::Matrix;
using bdc::Rng;
using bdc::Vector;

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

inline Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

inline Vector random_unit(Rng& rng, std::size_t dim) {
    Vector v(dim);
    double n2 = 0.0;
    while (n2 < 1e-6) {
        n2 = 0.0;
        for (double& x : v) {
            x = rng.normal();
            n2 += x * x;
        }
    }
    const double n = std::sqrt(n2);
    for (double& x : v) x /= n;
    return v;
}

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + rng.index(hi - lo + 1);
}

// Square orthogonal matrix from classical Gram-Schmidt on Gaussian columns.
inline Matrix random_orthogonal(Rng& rng, std::size_t n) {
    Matrix q = gaussian_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < n; ++c) d += q(i, c) * q(j, c);
            for (std::size_t c = 0; c < n; ++c) q(i, c) -= d * q(j, c);
        }
        double norm = 0.0;
        for (std::size_t c = 0; c < n; ++c) norm += q(i, c) * q(i, c);
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < n; ++c) q(i, c) /= norm;
    }
    return q;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

// Distance between columns i and j by direct differencing.
inline Matrix naive_distances(const Matrix& obs) {
    const std::size_t m = obs.cols();
    Matrix d(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < obs.rows(); ++r) {
                const double diff = obs(r, i) - obs(r, j);
                s += diff * diff;
            }
            d(i, j) = std::sqrt(s);
        }
    return d;
}

inline Matrix naive_center(const Matrix& d) {
    const std::size_t m = d.rows();
    Vector row(m, 0.0), col(m, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            row[i] += d(i, j) / static_cast<double>(m);
            col[j] += d(i, j) / static_cast<double>(m);
            grand += d(i, j) / static_cast<double>(m * m);
        }
    Matrix r(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) r(i, j) = d(i, j) - row[i] - col[j] + grand;
    return r;
}

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

inline double naive_softmax_log(const Vector& logits, std::size_t k) {
    double z = 0.0;
    for (double l : logits) z += std::exp(l);
    return std::log(std::exp(logits[k]) / z);
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("bdc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testing
