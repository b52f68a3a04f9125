// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace evomon {

/**
 * N x D block of 32-bit features for one snapshot and one source.
 *
 * Rows are instances, stored row-major. Row order matches `instance_ids`.
 */
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> instance_ids, std::size_t dims, std::vector<float> data,
                std::string source_name = {});

  std::size_t rows() const { return ids_.size(); }
  std::size_t dims() const { return dims_; }
  const std::vector<std::string>& instance_ids() const { return ids_; }
  const std::string& source_name() const { return source_; }
  std::span<const float> data() const { return data_; }

  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dims_, dims_}; }
  float at(std::size_t i, std::size_t j) const { return data_[i * dims_ + j]; }

  /// Rows selected by index, in the given order.
  FeatureMatrix select(std::span<const std::size_t> rows) const;

  /// Throws ValidationError naming the first offending row on non-finite
  /// values or duplicate ids.
  void validate() const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t dims_ = 0;
  std::vector<float> data_;
  std::string source_;
};

}  // namespace evomon
