// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/metrics/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "evomon/common/error.hpp"

namespace evomon::metrics {

double neighborhood_overlap(const FeatureMatrix& real, std::span<const std::string> real_groups,
                            const FeatureMatrix& gen_group, const std::string& group, std::size_t k) {
  if (real_groups.size() != real.rows()) throw ValidationError("overlap: one group label per real row is required");
  if (k == 0) throw ValidationError("overlap: k must be positive");
  if (k > real.rows()) {
    throw ValidationError("overlap: k = " + std::to_string(k) + " exceeds the " + std::to_string(real.rows()) +
                          " real instances");
  }
  if (gen_group.rows() == 0) throw ValidationError("overlap: generated group '" + group + "' is empty");
  if (gen_group.dims() != real.dims()) throw ValidationError("overlap: feature dimension mismatch");

  const std::size_t n_real = real.rows();
  const std::size_t dims = real.dims();
  const auto& real_ids = real.instance_ids();
  std::vector<double> fraction(gen_group.rows());
  const auto n_gen = static_cast<std::ptrdiff_t>(gen_group.rows());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t gi = 0; gi < n_gen; ++gi) {
    const auto g = gen_group.row(static_cast<std::size_t>(gi));
    std::vector<double> dist(n_real);
    for (std::size_t r = 0; r < n_real; ++r) {
      const auto row = real.row(r);
      double s = 0.0;
      for (std::size_t c = 0; c < dims; ++c) {
        const double diff = static_cast<double>(g[c]) - static_cast<double>(row[c]);
        s += diff * diff;
      }
      dist[r] = s;
    }
    std::vector<std::size_t> order(n_real);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (dist[a] != dist[b]) return dist[a] < dist[b];
                        return real_ids[a] < real_ids[b];
                      });
    std::size_t same = 0;
    for (std::size_t t = 0; t < k; ++t) same += real_groups[order[t]] == group ? 1 : 0;
    fraction[static_cast<std::size_t>(gi)] = static_cast<double>(same) / static_cast<double>(k);
  }
  double total = 0.0;
  for (double f : fraction) total += f;
  return total / static_cast<double>(fraction.size());
}

std::vector<double> silhouette_values(const embedding::BandLayout& band,
                                      const std::unordered_map<std::string, std::string>& labels) {
  const std::size_t n = band.points.size();
  std::map<std::string, std::size_t> group_index;
  std::vector<std::size_t> group_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = labels.find(band.points[i].instance_id);
    if (it == labels.end()) {
      throw ValidationError("separation: no label for instance '" + band.points[i].instance_id + "'");
    }
    group_of[i] = group_index.emplace(it->second, group_index.size()).first->second;
  }
  const std::size_t groups = group_index.size();
  if (groups < 2) throw ValidationError("separation undefined: band has fewer than two groups");
  std::vector<std::size_t> sizes(groups, 0);
  for (auto g : group_of) ++sizes[g];

  std::vector<double> s(n, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (sizes[group_of[i]] < 2) continue;
    std::vector<double> sum(groups, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum[group_of[j]] += std::hypot(band.points[i].x - band.points[j].x, band.points[i].y - band.points[j].y);
    }
    const double a = sum[group_of[i]] / static_cast<double>(sizes[group_of[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < groups; ++g) {
      if (g != group_of[i]) b = std::min(b, sum[g] / static_cast<double>(sizes[g]));
    }
    const double m = std::max(a, b);
    s[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return s;
}

double cluster_separation(const embedding::BandLayout& band,
                          const std::unordered_map<std::string, std::string>& labels) {
  const auto s = silhouette_values(band, labels);
  double total = 0.0;
  for (double v : s) total += v;
  return std::clamp(total / static_cast<double>(s.size()), -1.0, 1.0);
}

}  // namespace evomon::metrics
