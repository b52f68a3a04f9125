// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/common/feature_matrix.hpp"

#include <cmath>
#include <unordered_set>

#include "evomon/common/error.hpp"

namespace evomon {

FeatureMatrix::FeatureMatrix(std::vector<std::string> instance_ids, std::size_t dims, std::vector<float> data,
                             std::string source_name)
    : ids_(std::move(instance_ids)), dims_(dims), data_(std::move(data)), source_(std::move(source_name)) {
  if (data_.size() != ids_.size() * dims_) {
    throw ValidationError("feature matrix '" + source_ + "': " + std::to_string(data_.size()) +
                          " values do not fill " + std::to_string(ids_.size()) + " x " + std::to_string(dims_));
  }
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<float> data;
  ids.reserve(rows.size());
  data.reserve(rows.size() * dims_);
  for (std::size_t r : rows) {
    ids.push_back(ids_.at(r));
    auto src = row(r);
    data.insert(data.end(), src.begin(), src.end());
  }
  return FeatureMatrix(std::move(ids), dims_, std::move(data), source_);
}

void FeatureMatrix::validate() const {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!seen.insert(ids_[i]).second) {
      throw ValidationError("duplicate instance_id '" + ids_[i] + "' at row " + std::to_string(i));
    }
    for (float v : row(i)) {
      if (!std::isfinite(v)) {
        throw ValidationError("non-finite value in row " + std::to_string(i) + " (instance '" + ids_[i] + "')");
      }
    }
  }
}

}  // namespace evomon
