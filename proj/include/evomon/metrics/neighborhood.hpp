// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "evomon/common/feature_matrix.hpp"
#include "evomon/embedding/evolution.hpp"

namespace evomon::metrics {

/// Mean fraction, over the generated instances of `group`, of their k nearest
/// real instances (squared Euclidean in feature space, ties by instance_id)
/// whose group label equals `group`. `real_groups[i]` labels row i of `real`.
double neighborhood_overlap(const FeatureMatrix& real, std::span<const std::string> real_groups,
                            const FeatureMatrix& gen_group, const std::string& group, std::size_t k = 10);

/// Per-point silhouette coefficients on the band's (x, y) positions, in band
/// order. Points in singleton groups, and points with a(i) = b(i) = 0, score 0.
std::vector<double> silhouette_values(const embedding::BandLayout& band,
                                      const std::unordered_map<std::string, std::string>& labels);

/// Mean silhouette over the band. Throws ValidationError("separation undefined")
/// with fewer than two groups.
double cluster_separation(const embedding::BandLayout& band,
                          const std::unordered_map<std::string, std::string>& labels);

}  // namespace evomon::metrics
