#include "bdc/dcov.hpp"

#include <cmath>
#include <string>

#include "bdc/errors.hpp"

namespace bdc {
namespace {

Matrix centered_pairwise(const Matrix& samples) {
    const std::size_t n = samples.rows();
    const std::size_t p = samples.cols();
    Matrix a(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            double sq = 0.0;
            for (std::size_t c = 0; c < p; ++c) {
                const double diff = samples(k, c) - samples(l, c);
                sq += diff * diff;
            }
            a(k, l) = std::sqrt(sq);
        }
    }

    Vector row_mean(n, 0.0), col_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t l = 0; l < n; ++l) {
            row_mean[k] += a(k, l);
            col_mean[l] += a(k, l);
            grand += a(k, l);
        }
    }
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        row_mean[k] /= nn;
        col_mean[k] /= nn;
    }
    grand /= nn * nn;

    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            a(k, l) = a(k, l) - row_mean[k] - col_mean[l] + grand;
    return a;
}

double v_statistic(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.rows();
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) s += a(k, l) * b(k, l);
    return s / (static_cast<double>(n) * static_cast<double>(n));
}

void check_pair(const Matrix& x, const Matrix& y, const char* who) {
    if (x.rows() != y.rows()) {
        throw DimensionError(std::string(who) + ": sample counts " + std::to_string(x.rows()) +
                             " and " + std::to_string(y.rows()));
    }
    if (x.rows() < 2) throw DimensionError(std::string(who) + ": need at least 2 samples");
}

} // namespace

double dcov_oracle(const Matrix& x_samples, const Matrix& y_samples) {
    check_pair(x_samples, y_samples, "dcov_oracle");
    return v_statistic(centered_pairwise(x_samples), centered_pairwise(y_samples));
}

double dcorr(const Matrix& x_samples, const Matrix& y_samples) {
    check_pair(x_samples, y_samples, "dcorr");
    const Matrix a = centered_pairwise(x_samples);
    const Matrix b = centered_pairwise(y_samples);
    const double dvar_x = v_statistic(a, a);
    const double dvar_y = v_statistic(b, b);
    if (!(dvar_x > 0.0) || !(dvar_y > 0.0)) {
        throw DegenerateInput("dcorr: zero distance variance (constant sample)");
    }
    // V-statistic dCov^2 is non-negative in exact arithmetic; clamp round-off.
    const double dcov2 = std::max(v_statistic(a, b), 0.0);
    return std::sqrt(dcov2 / std::sqrt(dvar_x * dvar_y));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("pearson: length mismatch");
    if (x.size() < 2) throw DimensionError("pearson: need at least 2 samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInput("pearson: constant sample");
    return sxy / std::sqrt(sxx * syy);
}

Matrix column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

} // namespace bdc
