#pragma once

#include <span>

#include "bdc/linalg.hpp"

namespace bdc {

/// Brute-force squared distance covariance between paired samples (rows of x and y).
///
/// Builds both n x n distance matrices with explicit pairwise loops, double-centers
/// them by explicit mean subtraction and returns (1/n^2) sum_kl A_kl B_kl. This is
/// the V-statistic dCov^2_n; multiplied by n^2 it equals bdc_measure on the
/// corresponding BDC matrices. Kept free of the Gram-expansion path so it can act
/// as an independent check of bdc_metric.
double dcov_oracle(const Matrix& x_samples, const Matrix& y_samples);

/// Distance correlation dCov(x,y) / sqrt(dVar(x) dVar(y)), with dCov the square root
/// of dcov_oracle. Lies in [0, 1]; throws DegenerateInput if either sample is constant.
double dcorr(const Matrix& x_samples, const Matrix& y_samples);

/// Pearson product-moment correlation of two equal-length samples.
double pearson(std::span<const double> x, std::span<const double> y);

/// Wraps a 1-D sample as an n x 1 matrix.
Matrix column(std::span<const double> values);

} // namespace bdc
