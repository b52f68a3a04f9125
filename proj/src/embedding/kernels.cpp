// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/embedding/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evomon/common/error.hpp"

namespace evomon::embedding {

namespace {

void check_finite_rows(const FeatureMatrix& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (float v : x.row(i)) {
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite value in row " + std::to_string(i) + " (instance '" +
                              x.instance_ids()[i] + "')");
      }
    }
  }
}

void check_sizes(const AffinityMatrix& p, std::span<const Point2> y) {
  if (p.p.size() != y.size()) {
    throw ValidationError("affinity matrix has " + std::to_string(p.p.size()) + " rows but " +
                          std::to_string(y.size()) + " positions were given");
  }
}

// Entropy (nats) and unnormalised row for one beta, shifted by the smallest distance.
double fill_row(std::span<const double> d, std::size_t self, double d_min, double beta, std::span<double> out) {
  double sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j == self) {
      out[j] = 0.0;
      continue;
    }
    const double shifted = d[j] - d_min;
    const double v = std::exp(-shifted * beta);
    out[j] = v;
    sum += v;
    weighted += v * shifted;
  }
  for (double& v : out) v /= sum;
  return std::log(sum) + beta * weighted / sum;
}

}  // namespace

SquareMatrix pairwise_sq_dists(const FeatureMatrix& x) {
  const std::size_t n = x.rows();
  if (n < 2) throw ValidationError("pairwise distances need at least 2 rows, got " + std::to_string(n));
  check_finite_rows(x);

  const std::size_t dims = x.dims();
  SquareMatrix out(n);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const float* a = x.row(i).data();
    for (std::size_t j = i + 1; j < n; ++j) {
      const float* b = x.row(j).data();
      double s = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

ConditionalAffinities conditional_affinities(const SquareMatrix& sq_dists, double perplexity) {
  const std::size_t n = sq_dists.size();
  if (!(perplexity > 1.0)) throw ConfigError("perplexity must be > 1, got " + std::to_string(perplexity));
  if (!(perplexity < static_cast<double>(n))) {
    throw ConfigError("perplexity " + std::to_string(perplexity) + " must be smaller than the number of points (" +
                      std::to_string(n) + ")");
  }

  constexpr int kMaxBisection = 64;
  constexpr double kEntropyTol = 1e-12;
  const double target = std::log(perplexity);  // nats
  const double log_lo0 = std::log(1e-10);
  const double log_hi0 = std::log(1e10);

  ConditionalAffinities result{SquareMatrix(n), std::vector<double>(n)};
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    auto d = sq_dists.row(i);
    auto out = result.p.row(i);
    double d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d_min = std::min(d_min, d[j]);

    double lo = log_lo0;
    double hi = log_hi0;
    double log_sigma = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxBisection; ++it) {
      log_sigma = 0.5 * (lo + hi);
      const double sigma = std::exp(log_sigma);
      const double beta = 1.0 / (2.0 * sigma * sigma);
      const double h = fill_row(d, i, d_min, beta, out);
      if (std::abs(h - target) < kEntropyTol) break;
      if (h < target) {
        lo = log_sigma;
      } else {
        hi = log_sigma;
      }
    }
    result.sigmas[i] = std::exp(log_sigma);
  }
  return result;
}

AffinityMatrix symmetrize(const ConditionalAffinities& conditional) {
  const std::size_t n = conditional.p.size();
  AffinityMatrix out{SquareMatrix(n), conditional.sigmas};
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (conditional.p(i, j) + conditional.p(j, i)) * scale;
      out.p(i, j) = v;
      out.p(j, i) = v;
    }
  }
  return out;
}

AffinityMatrix joint_affinities(const FeatureMatrix& x, double perplexity) {
  if (!(perplexity < static_cast<double>(x.rows()))) {
    throw ConfigError("perplexity " + std::to_string(perplexity) + " must be smaller than the number of points (" +
                      std::to_string(x.rows()) + ")");
  }
  return symmetrize(conditional_affinities(pairwise_sq_dists(x), perplexity));
}

double kl_cost(const AffinityMatrix& p, std::span<const Point2> y) {
  check_sizes(p, y);
  const std::size_t n = y.size();
  const auto rows = static_cast<std::ptrdiff_t>(n);
  // Pass 1: Z = sum_{i != j} w_ij. Pass 2: sum p log(p / q) = sum p (log p - log w) + log Z.
  std::vector<double> row_z(n, 0.0);
  std::vector<double> row_kl(n, 0.0);
  std::vector<double> row_mass(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto prow = p.p.row(i);
    double z = 0.0;
    double kl = 0.0;
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = y[i].x - y[j].x;
      const double dy = y[i].y - y[j].y;
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      z += w;
      const double pij = prow[j];
      if (pij > 0.0) {
        kl += pij * (std::log(pij) - std::log(w));
        mass += pij;
      }
    }
    row_z[i] = z;
    row_kl[i] = kl;
    row_mass[i] = mass;
  }
  double z = 0.0, kl = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    z += row_z[i];
    kl += row_kl[i];
    mass += row_mass[i];
  }
  return std::max(0.0, kl + mass * std::log(z));
}

std::vector<Point2> tsne_gradient(const AffinityMatrix& p, std::span<const Point2> y, double exaggeration) {
  check_sizes(p, y);
  const std::size_t n = y.size();
  const auto rows = static_cast<std::ptrdiff_t>(n);
  // One sweep per row collects Z_i = sum_j w_ij, the attractive sum p_ij w_ij (yi - yj)
  // and the unnormalised repulsive sum w_ij^2 (yi - yj); the gradient is
  // 4 (attr_i - rep_i / Z) once Z is known.
  std::vector<double> row_z(n);
  std::vector<Point2> attr(n);
  std::vector<Point2> rep(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto prow = p.p.row(i);
    const double xi = y[i].x;
    const double yi = y[i].y;
    double z = 0.0, ax = 0.0, ay = 0.0, rx = 0.0, ry = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = xi - y[j].x;
      const double dy = yi - y[j].y;
      const double w = 1.0 / (1.0 + dx * dx + dy * dy);
      z += w;
      const double pw = prow[j] * w;
      ax += pw * dx;
      ay += pw * dy;
      const double ww = w * w;
      rx += ww * dx;
      ry += ww * dy;
    }
    row_z[i] = z;
    attr[i] = {ax, ay};
    rep[i] = {rx, ry};
  }
  double z = 0.0;
  for (double v : row_z) z += v;

  std::vector<Point2> grad(n);
  const double inv_z = 1.0 / z;
  for (std::size_t i = 0; i < n; ++i) {
    grad[i].x = 4.0 * (exaggeration * attr[i].x - rep[i].x * inv_z);
    grad[i].y = 4.0 * (exaggeration * attr[i].y - rep[i].y * inv_z);
  }
  return grad;
}

}  // namespace evomon::embedding
