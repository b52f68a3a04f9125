// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <Eigen/Dense>

#include "evomon/common/feature_matrix.hpp"

namespace evomon::metrics {

/// Sample mean and unbiased (N-1) covariance of a feature set.
struct GaussianMoments {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

/// Two-pass moments in double precision. Throws ValidationError("insufficient samples") for N < 2.
GaussianMoments gaussian_moments(const FeatureMatrix& x);

/// Principal square root of a symmetric PSD matrix via symmetric
/// eigendecomposition. The input is symmetrised first and negative
/// eigenvalues are clamped to 0. Throws NumericalError on solver failure.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a);

struct FidResult {
  double value = 0.0;
  /// Ridge added to each covariance (0 unless a covariance was near-singular).
  double epsilon_real = 0.0;
  double epsilon_gen = 0.0;
};

/**
 * Frechet distance between Gaussian fits of two feature sets:
 *
 *   |mu_r - mu_g|^2 + Tr(S_r) + Tr(S_g) - 2 Tr((S_r^1/2 S_g S_r^1/2)^1/2)
 *
 * When either covariance has an eigenvalue below eps = 1e-6 * mean(diag),
 * both are replaced by S + eps I (each with its own eps) in every term.
 */
FidResult fid_detailed(const GaussianMoments& real, const GaussianMoments& gen);
FidResult fid_detailed(const FeatureMatrix& real, const FeatureMatrix& gen);

double fid(const FeatureMatrix& real, const FeatureMatrix& gen);

}  // namespace evomon::metrics
