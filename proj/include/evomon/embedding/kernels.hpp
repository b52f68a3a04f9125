// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evomon/common/feature_matrix.hpp"

namespace evomon::embedding {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

/// Dense N x N matrix of doubles, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), v_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {v_.data() + i * n_, n_}; }
  std::span<double> row(std::size_t i) { return {v_.data() + i * n_, n_}; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> v_;
};

struct ConditionalAffinities {
  SquareMatrix p;              ///< row-stochastic p_{j|i}, zero diagonal
  std::vector<double> sigmas;  ///< Gaussian bandwidth per row
};

/// Joint t-SNE affinities: symmetric, zero diagonal, total mass 1.
struct AffinityMatrix {
  SquareMatrix p;
  std::vector<double> sigmas;
};

// The kernels below parallelise over rows with OpenMP. Every row's reduction
// runs in a fixed order inside one thread and cross-row sums are done serially,
// so results are bit-identical for any thread count.

/// Squared Euclidean distances, accumulated in double. Throws ValidationError
/// naming the row on non-finite input; requires at least two rows.
SquareMatrix pairwise_sq_dists(const FeatureMatrix& x);

/// Per-row Gaussian conditionals with sigma_i chosen by bisection on log(sigma)
/// so that 2^H(P_i) matches `perplexity`. Requires 1 < perplexity < N.
ConditionalAffinities conditional_affinities(const SquareMatrix& sq_dists, double perplexity);

/// p_ij = (p_{j|i} + p_{i|j}) / 2N.
AffinityMatrix symmetrize(const ConditionalAffinities& conditional);

/// KL(P || Q) with the Student-t output kernel.
double kl_cost(const AffinityMatrix& p, std::span<const Point2> y);

/// dKL/dy with P scaled by `exaggeration`.
std::vector<Point2> tsne_gradient(const AffinityMatrix& p, std::span<const Point2> y, double exaggeration = 1.0);

/// Entropy-matched affinities straight from features.
AffinityMatrix joint_affinities(const FeatureMatrix& x, double perplexity);

/// Serial, unoptimised versions of the kernels above, kept as a test and
/// benchmark baseline. Same contracts.
namespace reference {

SquareMatrix pairwise_sq_dists(const FeatureMatrix& x);
double kl_cost(const AffinityMatrix& p, std::span<const Point2> y);
std::vector<Point2> tsne_gradient(const AffinityMatrix& p, std::span<const Point2> y, double exaggeration = 1.0);

}  // namespace reference

}  // namespace evomon::embedding
