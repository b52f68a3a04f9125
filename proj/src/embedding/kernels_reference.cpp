// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

// Straight double loops over the defining formulas. No threading, no fused
// passes; materialises Q explicitly.

#include <cmath>
#include <string>

#include "evomon/common/error.hpp"
#include "evomon/embedding/kernels.hpp"

namespace evomon::embedding::reference {

namespace {

SquareMatrix student_t_weights(std::span<const Point2> y, double& z) {
  const std::size_t n = y.size();
  SquareMatrix w(n);
  z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = y[i].x - y[j].x;
      const double dy = y[i].y - y[j].y;
      w(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
      z += w(i, j);
    }
  }
  return w;
}

}  // namespace

SquareMatrix pairwise_sq_dists(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  if (n < 2) throw ValidationError("pairwise distances need at least 2 rows");
  SquareMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < x.dims(); ++k) {
        const double a = x.at(i, k);
        const double b = x.at(j, k);
        if (!std::isfinite(a)) throw ValidationError("non-finite value in row " + std::to_string(i));
        s += (a - b) * (a - b);
      }
      out(i, j) = s;
    }
  }
  return out;
}

double kl_cost(const AffinityMatrix& p, std::span<const Point2> y) {
  const std::size_t n = y.size();
  double z = 0.0;
  const SquareMatrix w = student_t_weights(y, z);
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p.p(i, j) <= 0.0) continue;
      const double q = w(i, j) / z;
      kl += p.p(i, j) * std::log(p.p(i, j) / q);
    }
  }
  return kl;
}

std::vector<Point2> tsne_gradient(const AffinityMatrix& p, std::span<const Point2> y, double exaggeration) {
  const std::size_t n = y.size();
  double z = 0.0;
  const SquareMatrix w = student_t_weights(y, z);
  std::vector<Point2> grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = w(i, j) / z;
      const double mult = 4.0 * (exaggeration * p.p(i, j) - q) * w(i, j);
      grad[i].x += mult * (y[i].x - y[j].x);
      grad[i].y += mult * (y[i].y - y[j].y);
    }
  }
  return grad;
}

}  // namespace evomon::embedding::reference
