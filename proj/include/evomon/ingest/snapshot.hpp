// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evomon/common/feature_matrix.hpp"
#include "evomon/ingest/manifest.hpp"

namespace evomon::ingest {

/// labels.csv: one row per instance, columns as declared in the manifest.
struct LabelTable {
  std::vector<std::string> columns;  ///< label columns (without instance_id)
  std::vector<std::string> instance_ids;
  std::vector<std::vector<std::string>> rows;  ///< rows[i][c]

  std::vector<std::string> column(const std::string& name) const;
  /// instance_id -> value of `name`.
  std::map<std::string, std::string> column_map(const std::string& name) const;

  bool operator==(const LabelTable&) const = default;
};

/// Everything extracted at one training checkpoint.
struct Snapshot {
  std::int64_t training_iteration = 0;
  std::vector<FeatureMatrix> features;  ///< one per manifest source, manifest order
  LabelTable labels;
  std::map<std::string, double> metrics;      ///< scalar losses etc.
  std::map<std::string, std::string> thumbnails;  ///< instance_id -> PNG bytes

  const FeatureMatrix& feature(const std::string& source) const;

  bool operator==(const Snapshot&) const = default;
};

/// "iter_" + iteration zero-padded to 9 digits.
std::string snapshot_dir_name(std::int64_t training_iteration);
std::optional<std::int64_t> parse_snapshot_dir_name(const std::string& name);
std::filesystem::path snapshot_dir(const std::filesystem::path& run_dir, std::int64_t training_iteration);

/// Checks a snapshot against the manifest before anything touches disk;
/// throws ValidationError.
void check_snapshot(const RunManifest& manifest, const Snapshot& snapshot);

/// Writes meta.json, labels.csv, feat_<source>.f32, thumbs/, then the empty DONE
/// sentinel. Throws ConflictError if the snapshot directory already exists.
std::filesystem::path write_snapshot(const std::filesystem::path& run_dir, const RunManifest& manifest,
                                     const Snapshot& snapshot);

struct ValidationIssue {
  std::string file;
  std::optional<std::size_t> row;
  std::string rule;  ///< incomplete, meta, iteration, schema, size, value, order, origin, duplicate_id, rows
  std::string message;

  std::string to_string() const;
};

enum class SnapshotStatus { ok, incomplete, invalid };

struct ValidationReport {
  std::filesystem::path dir;
  SnapshotStatus status = SnapshotStatus::invalid;
  std::optional<Snapshot> snapshot;
  std::vector<ValidationIssue> issues;
};

/// Loads and checks every snapshot invariant. A missing DONE yields status
/// `incomplete` with no other checks.
ValidationReport validate_snapshot(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace evomon::ingest
