// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

// Independent brute-force oracles for tests. Nothing here calls into the
// library's numerical code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "evomon/common/feature_matrix.hpp"
#include "evomon/common/rng.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;
struct Pt {
  double x, y;
};

inline Matrix sq_dists(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  Matrix d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) s += std::pow(rows[i][k] - rows[j][k], 2);
      d[i][j] = s;
    }
  return d;
}

inline std::vector<std::vector<double>> rows_of(const evomon::FeatureMatrix& x) {
  std::vector<std::vector<double>> r(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) r[i].assign(x.row(i).begin(), x.row(i).end());
  return r;
}

/// 2^H of a probability row in bits, skipping zeros.
inline double row_perplexity(const std::vector<double>& row) {
  double h = 0;
  for (double p : row)
    if (p > 0) h -= p * std::log2(p);
  return std::exp2(h);
}

/// KL(P||Q) with explicit Q normalisation, long double accumulation.
inline double kl(const Matrix& p, const std::vector<Pt>& y) {
  const std::size_t n = y.size();
  long double z = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) z += 1.0L / (1.0L + std::pow((long double)y[i].x - y[j].x, 2) + std::pow((long double)y[i].y - y[j].y, 2));
  long double c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || p[i][j] <= 0) continue;
      long double w = 1.0L / (1.0L + std::pow((long double)y[i].x - y[j].x, 2) + std::pow((long double)y[i].y - y[j].y, 2));
      c += p[i][j] * std::log(p[i][j] / (w / z));
    }
  return static_cast<double>(c);
}

/// Central finite-difference gradient of the oracle KL.
inline std::vector<Pt> kl_fd_gradient(const Matrix& p, std::vector<Pt> y, double h) {
  std::vector<Pt> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      double& v = c == 0 ? y[i].x : y[i].y;
      const double saved = v;
      v = saved + h;
      const double up = kl(p, y);
      v = saved - h;
      const double down = kl(p, y);
      v = saved;
      (c == 0 ? g[i].x : g[i].y) = (up - down) / (2 * h);
    }
  }
  return g;
}

/// Mean silhouette (Euclidean on 2D points); singleton-cluster points score 0.
inline double silhouette(const std::vector<Pt>& pts, const std::vector<std::string>& labels) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < pts.size(); ++i) groups[labels[i]].push_back(i);
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& own = groups[labels[i]];
    if (own.size() < 2) continue;
    auto dist = [&](std::size_t j) { return std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y); };
    double a = 0;
    for (auto j : own)
      if (j != i) a += dist(j);
    a /= double(own.size() - 1);
    double b = 1e300;
    for (auto& [g, members] : groups) {
      if (g == labels[i]) continue;
      double s = 0;
      for (auto j : members) s += dist(j);
      b = std::min(b, s / double(members.size()));
    }
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / double(pts.size());
}

/// Leave-one-out k-NN label accuracy on 2D points.
inline double knn_accuracy(const std::vector<Pt>& pts, const std::vector<int>& labels, std::size_t k) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) d.push_back({std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y), j});
    std::sort(d.begin(), d.end());
    std::map<int, int> votes;
    for (std::size_t t = 0; t < k; ++t) votes[labels[d[t].second]]++;
    int best = -1, best_votes = -1;
    for (auto& [l, v] : votes)
      if (v > best_votes) best = l, best_votes = v;
    correct += best == labels[i];
  }
  return double(correct) / double(pts.size());
}

inline std::string id_of(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "i%05zu", i);
  return buf;
}

/// Gaussian blobs: cluster c centred at `separation` * e_c (c < dims), unit noise.
inline evomon::FeatureMatrix blobs(std::size_t clusters, std::size_t per_cluster, std::size_t dims, double separation,
                                   std::uint64_t seed, std::vector<int>* labels = nullptr) {
  evomon::Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t c = 0; c < clusters; ++c)
    for (std::size_t i = 0; i < per_cluster; ++i) {
      ids.push_back(id_of(c * per_cluster + i));
      if (labels) labels->push_back(int(c));
      for (std::size_t k = 0; k < dims; ++k) data.push_back(float((k == c % dims ? separation : 0.0) + rng.normal()));
    }
  return evomon::FeatureMatrix(std::move(ids), dims, std::move(data), "test");
}

inline evomon::FeatureMatrix random_matrix(std::size_t n, std::size_t dims, std::uint64_t seed) {
  evomon::Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(id_of(i));
    for (std::size_t k = 0; k < dims; ++k) data.push_back(float(rng.normal()));
  }
  return evomon::FeatureMatrix(std::move(ids), dims, std::move(data), "test");
}

// Independent diagonal Gaussians; float32 as stored on disk.
inline evomon::FeatureMatrix gaussian_sample(std::size_t n, const std::vector<double>& mean,
                                             const std::vector<double>& var, std::uint64_t seed) {
  evomon::Rng rng(seed);
  std::vector<std::string> ids;
  std::vector<float> data;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    for (std::size_t k = 0; k < mean.size(); ++k) data.push_back(float(mean[k] + std::sqrt(var[k]) * rng.normal()));
  }
  return evomon::FeatureMatrix(ids, mean.size(), data);
}

// 5-D sampled FID fixture. The mean shift dominates so sampling noise (about
// 1.6% of the value at N = 5000) sits well inside a 5% band.
struct Fid5 {
  std::vector<double> mu_r = {0, 0, 0, 0, 0}, var_r = {1, 1.5, 2, 2.5, 3};
  std::vector<double> mu_g = {2, -1, 1, 2, -2}, var_g = {1.5, 1, 2.5, 2, 3.5};
  std::size_t n = 5000;

  // Diagonal covariances: tr term reduces to sum (sqrt(a) - sqrt(b))^2.
  double closed_form() const {
    double v = 0;
    for (std::size_t k = 0; k < mu_r.size(); ++k)
      v += std::pow(mu_r[k] - mu_g[k], 2) + std::pow(std::sqrt(var_r[k]) - std::sqrt(var_g[k]), 2);
    return v;
  }
  evomon::FeatureMatrix real() const { return gaussian_sample(n, mu_r, var_r, 1); }
  evomon::FeatureMatrix gen() const { return gaussian_sample(n, mu_g, var_g, 2); }
};

/// Mean fraction of each generated row's k nearest real rows (ties by id)
/// that carry `group`.
inline double overlap(const evomon::FeatureMatrix& real, const std::vector<std::string>& real_groups,
                      const evomon::FeatureMatrix& gen, const std::string& group, std::size_t k) {
  const auto r = rows_of(real), g = rows_of(gen);
  double total = 0;
  for (const auto& q : g) {
    std::vector<std::tuple<double, std::string, std::size_t>> d;
    for (std::size_t j = 0; j < r.size(); ++j) {
      double s = 0;
      for (std::size_t c = 0; c < q.size(); ++c) s += (q[c] - r[j][c]) * (q[c] - r[j][c]);
      d.emplace_back(s, real.instance_ids()[j], j);
    }
    std::sort(d.begin(), d.end());
    const std::size_t kk = std::min(k, d.size());
    std::size_t same = 0;
    for (std::size_t t = 0; t < kk; ++t) same += real_groups[std::get<2>(d[t])] == group;
    total += double(same) / double(kk);
  }
  return total / double(g.size());
}

}  // namespace oracle
