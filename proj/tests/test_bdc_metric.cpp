#include "doctest.h"

#include <cmath>
#include <limits>

#include "bdc/bdc_metric.hpp"
#include "bdc/dcov.hpp"
#include "bdc/errors.hpp"
#include "support.hpp"

using namespace bdc;
using testing::between;
using testing::random_matrix;

namespace {

void check_centered(const Matrix& r, double tol) {
    for (std::size_t i = 0; i < r.rows(); ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < r.cols(); ++j) {
            row += r(i, j);
            col += r(j, i);
        }
        CHECK(std::abs(row) < tol);
        CHECK(std::abs(col) < tol);
    }
}

double elementwise_sum(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

} // namespace

TEST_CASE("distance_matrix examples") {
    SUBCASE("coincident columns") {
        const Matrix obs = Matrix::from_rows({{1, 1}, {2, 2}});
        CHECK(distance_matrix(obs).values == Matrix(2, 2, 0.0));
    }
    SUBCASE("3-4-5") {
        const Matrix obs = Matrix::from_rows({{0, 3}, {0, 4}});
        CHECK(distance_matrix(obs).values == Matrix::from_rows({{0, 5}, {5, 0}}));
    }
    SUBCASE("pairwise loop oracle") {
        Rng rng(10);
        const Matrix obs = random_matrix(rng, 6, 10);
        CHECK(max_abs_diff(distance_matrix(obs).values, testing::naive_distances(obs)) < 1e-10);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(distance_matrix(Matrix(3, 1)), DimensionError);
        Matrix bad(2, 3, 0.0);
        bad(1, 1) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(distance_matrix(bad), DegenerateInput);
    }
}

TEST_CASE("distance_matrix invariants on random maps") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix obs = random_matrix(rng, between(rng, 1, 6), between(rng, 2, 12), -5, 5);
        const Matrix d = distance_matrix(obs).values;
        const std::size_t m = d.rows();
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(d(i, i) == 0.0);
            for (std::size_t j = 0; j < m; ++j) {
                CHECK(d(i, j) >= 0.0);
                CHECK(std::abs(d(i, j) - d(j, i)) < 1e-12);
            }
        }
        for (int t = 0; t < 20; ++t) {
            const std::size_t a = rng.index(m), b = rng.index(m), c = rng.index(m);
            CHECK(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
        }
    }
}

TEST_CASE("distance_matrix clamps round-off below zero") {
    // Large equal columns make the Gram expansion cancel catastrophically.
    const Matrix obs = Matrix::from_rows({{1e8 + 0.1, 1e8 + 0.1, 1e8}, {3e7, 3e7, 3e7}});
    const Matrix d = distance_matrix(obs).values;
    for (double v : d.data()) CHECK(std::isfinite(v));
    for (double v : d.data()) CHECK(v >= 0.0);
}

TEST_CASE("double_center examples") {
    SUBCASE("hand-computed 2x2") {
        const BdcMatrix r = double_center({Matrix::from_rows({{0, 5}, {5, 0}})});
        CHECK(r.values == Matrix::from_rows({{-2.5, 2.5}, {2.5, -2.5}}));
        CHECK_FALSE(r.normalized);
    }
    SUBCASE("zero in, zero out") {
        CHECK(double_center({Matrix(3, 3, 0.0)}).values == Matrix(3, 3, 0.0));
    }
    SUBCASE("random symmetric zero-diagonal 8x8") {
        Rng rng(12);
        Matrix d(8, 8, 0.0);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) d(i, j) = d(j, i) = rng.uniform(0, 3);
        const Matrix r = double_center({d}).values;
        check_centered(r, 1e-9);
        CHECK(max_abs_diff(r, testing::naive_center(d)) < 1e-12);
    }
    SUBCASE("invalid input") {
        CHECK_THROWS_AS(double_center({Matrix(2, 3)}), DimensionError);
        CHECK_THROWS_AS(double_center({Matrix::from_rows({{1, 1}, {1, 0}})}), DegenerateInput);
        CHECK_THROWS_AS(double_center({Matrix::from_rows({{0, -1}, {-1, 0}})}), DegenerateInput);
    }
}

TEST_CASE("bdc_matrix examples") {
    const Matrix same = Matrix::from_rows({{2, 2}, {7, 7}});
    CHECK(bdc_matrix(same, false).values == Matrix(2, 2, 0.0));
    CHECK_THROWS_AS(bdc_matrix(same, true), DegenerateInput);

    const BdcMatrix r = bdc_matrix(Matrix::from_rows({{0, 3}, {0, 4}}), true);
    CHECK(r.normalized);
    CHECK(max_abs_diff(r.values, Matrix::from_rows({{-0.5, 0.5}, {0.5, -0.5}})) < 1e-15);
}

TEST_CASE("bdc_matrix properties on random maps") {
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = between(rng, 1, 6), m = between(rng, 2, 12);
        const Matrix obs = random_matrix(rng, k, m, -3, 3);
        const Matrix raw = bdc_matrix(obs, false).values;
        const Matrix unit = bdc_matrix(obs, true).values;

        check_centered(raw, 1e-9);
        CHECK(max_abs_diff(raw, transpose(raw)) < 1e-12);
        CHECK(std::abs(frobenius_norm(unit) - 1.0) < 1e-10);

        Matrix shifted = obs;
        for (std::size_t i = 0; i < k; ++i) {
            const double c = rng.uniform(-10, 10);
            for (std::size_t j = 0; j < m; ++j) shifted(i, j) += c;
        }
        CHECK(max_abs_diff(bdc_matrix(shifted, false).values, raw) < 1e-9);

        const Matrix rotated = matmul(testing::random_orthogonal(rng, k), obs);
        CHECK(max_abs_diff(distance_matrix(rotated).values, distance_matrix(obs).values) < 1e-8);
        CHECK(max_abs_diff(bdc_matrix(rotated, false).values, raw) < 1e-8);

        const double c = rng.uniform(0.1, 10);
        Matrix scaled = obs;
        for (double& v : scaled.data()) v *= c;
        Matrix expected = raw;
        for (double& v : expected.data()) v *= c;
        CHECK(max_abs_diff(bdc_matrix(scaled, false).values, expected) < 1e-9);
        CHECK(max_abs_diff(bdc_matrix(scaled, true).values, unit) < 1e-9);
    }
}

TEST_CASE("bdc_measure examples") {
    const BdcMatrix zero{Matrix(2, 2, 0.0), false};
    CHECK(bdc_measure(zero, zero) == 0.0);

    const BdcMatrix r{Matrix::from_rows({{-2.5, 2.5}, {2.5, -2.5}}), false};
    CHECK(bdc_measure(r, r) == doctest::Approx(25.0).epsilon(1e-15));

    Rng rng(14);
    const BdcMatrix a = bdc_matrix(random_matrix(rng, 3, 7), false);
    const BdcMatrix b = bdc_matrix(random_matrix(rng, 5, 7), false);
    CHECK(std::abs(bdc_measure(a, b) - elementwise_sum(a.values, b.values)) < 1e-10);

    CHECK_THROWS_AS(bdc_measure(a, bdc_matrix(random_matrix(rng, 3, 6), false)), DimensionError);
    CHECK_THROWS_AS(bdc_measure(a, bdc_matrix(random_matrix(rng, 3, 7), true)), std::invalid_argument);
}

TEST_CASE("bdc_measure: self measure is the squared norm") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const BdcMatrix r = bdc_matrix(random_matrix(rng, between(rng, 1, 6), between(rng, 2, 12)), false);
        const double v = bdc_measure(r, r);
        CHECK(v >= 0.0);
        const double f = frobenius_norm(r.values);
        CHECK(std::abs(v - f * f) < 1e-10);
    }
}

TEST_CASE("bdc_measure: non-negative on pairs from real data") {
    Rng rng(16);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = between(rng, 2, 12);
        const BdcMatrix a = bdc_matrix(random_matrix(rng, between(rng, 1, 6), m), false);
        const BdcMatrix b = bdc_matrix(random_matrix(rng, between(rng, 1, 6), m), false);
        CHECK(bdc_measure(a, b) >= -1e-9);
    }
}

TEST_CASE("dcov_oracle examples") {
    const Matrix x = Matrix::from_rows({{0.0}, {1.0}});
    CHECK(dcov_oracle(x, x) > 0.0);

    Rng rng(17);
    const Matrix constant(6, 2, 3.0);
    CHECK(dcov_oracle(constant, random_matrix(rng, 6, 3)) == 0.0);

    const Matrix t = random_matrix(rng, 4, 5);
    const Matrix s = random_matrix(rng, 2, 5);
    const double via_measure = bdc_measure(bdc_matrix(t, false), bdc_matrix(s, false));
    CHECK(testing::rel_diff(25.0 * dcov_oracle(transpose(t), transpose(s)), via_measure) < 1e-9);

    CHECK_THROWS_AS(dcov_oracle(random_matrix(rng, 4, 1), random_matrix(rng, 5, 1)), DimensionError);
}

TEST_CASE("dcov_oracle: trace form equals m^2 times the oracle") {
    Rng rng(18);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = between(rng, 2, 12);
        const Matrix t = random_matrix(rng, between(rng, 1, 6), m);
        const Matrix s = random_matrix(rng, between(rng, 1, 6), m);
        const double lhs = bdc_measure(bdc_matrix(t, false), bdc_matrix(s, false));
        const double rhs = static_cast<double>(m * m) * dcov_oracle(transpose(t), transpose(s));
        CHECK(testing::rel_diff(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("dcorr examples") {
    Rng rng(19);
    Vector xs(50);
    for (double& v : xs) v = rng.normal();
    const Matrix x = column(xs);
    CHECK(dcorr(x, x) == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(dcorr(Matrix(10, 1, 2.0), random_matrix(rng, 10, 1)), DegenerateInput);
    CHECK_THROWS_AS(dcorr(random_matrix(rng, 10, 1), Matrix(10, 1, 2.0)), DegenerateInput);
}

TEST_CASE("dcorr: nonlinear dependence invisible to Pearson") {
    Rng rng(20);
    Vector x(2000), y(2000);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(-1, 1);
        y[i] = x[i] * x[i];
    }
    CHECK(std::abs(pearson(x, y)) < 0.05);
    CHECK(dcorr(column(x), column(y)) > 0.4);

    Vector a(2000), b(2000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    CHECK(dcorr(column(a), column(b)) < 0.1);
}

TEST_CASE("dcorr stays in [0, 1] on random samples") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = between(rng, 3, 30);
        const double r = dcorr(random_matrix(rng, n, between(rng, 1, 4)), random_matrix(rng, n, between(rng, 1, 4)));
        CHECK(r >= -1e-9);
        CHECK(r <= 1.0 + 1e-9);
    }
}

TEST_CASE("pearson") {
    CHECK(pearson(Vector{1, 2, 3}, Vector{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(pearson(Vector{1, 2, 3}, Vector{3, 2, 1}) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(pearson(Vector{1, 1, 1}, Vector{1, 2, 3}), DegenerateInput);
}
