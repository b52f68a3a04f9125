// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evomon/common/feature_matrix.hpp"
#include "evomon/embedding/evolution.hpp"

namespace evomon::metrics {

struct GroupMetrics {
  std::optional<double> fid;
  double fid_epsilon_real = 0.0;
  double fid_epsilon_gen = 0.0;
  std::optional<double> overlap;     ///< [0, 1]
  std::optional<double> separation;  ///< [-1, 1], mean silhouette of the group's points
  std::size_t real_count = 0;
  std::size_t generated_count = 0;
  std::vector<std::string> flags;  ///< why a cell is null

  bool operator==(const GroupMetrics&) const = default;
};

struct MetricEntry {
  std::size_t snapshot_index = 0;
  std::int64_t training_iteration = 0;
  std::map<std::string, GroupMetrics> groups;
  std::optional<double> separation;  ///< whole-band silhouette
  std::map<std::string, double> losses;

  bool operator==(const MetricEntry&) const = default;
};

struct MetricSeries {
  std::vector<MetricEntry> entries;

  bool operator==(const MetricSeries&) const = default;
};

/// Everything one snapshot contributes to the metric series.
struct SnapshotMetricsInput {
  std::int64_t training_iteration = 0;
  const FeatureMatrix* features = nullptr;  ///< metric source; rows in label order
  std::span<const std::string> origins;     ///< "real" / "generated" per row
  std::span<const std::string> groups;      ///< group label per row
  std::map<std::string, double> losses;
  const embedding::BandLayout* band = nullptr;  ///< null when the snapshot has no band
};

struct SeriesOptions {
  std::size_t overlap_k = 10;
};

MetricEntry compute_metric_entry(const SnapshotMetricsInput& input, std::size_t snapshot_index,
                                 const SeriesOptions& options = {});

/// One entry per snapshot, in order. Training iterations must strictly increase.
MetricSeries build_metric_series(std::span<const SnapshotMetricsInput> snapshots, const SeriesOptions& options = {});

/// Appends an entry, enforcing strictly increasing snapshot order.
void append_entry(MetricSeries& series, MetricEntry entry);

/// {"schema": "evomon.metrics.v1", "entries": [{"snapshot_index", "training_iteration",
///   "separation", "losses": {..}, "groups": {g: {"fid", "fid_epsilon_real", "fid_epsilon_gen",
///   "overlap", "separation", "real_count", "generated_count", "flags"}}}]}
nlohmann::json metrics_to_json(const MetricSeries& series);
MetricSeries metrics_from_json(const nlohmann::json& doc);

/// Header: snapshot_index,training_iteration,group,fid,overlap,separation.
/// Null cells are empty; numbers use 9 significant digits.
std::string metrics_to_csv(const MetricSeries& series);

}  // namespace evomon::metrics
