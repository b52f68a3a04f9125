// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "evomon/embedding/config.hpp"

namespace evomon::ingest {

struct SourceSpec {
  std::string name;
  std::size_t dims = 0;

  bool operator==(const SourceSpec&) const = default;
};

/**
 * Contents of <run_dir>/run.json.
 *
 * `label_columns` starts with "origin" and lists the labels.csv columns after
 * instance_id, in order. The embedding runs on `primary_source`, metrics on
 * `metrics_source`, grouping by `group_column`; empty values resolve to the
 * first source and to "group" (or the first non-origin column).
 */
struct RunManifest {
  std::string run_id;
  std::int64_t cadence_n = 5000;
  std::vector<SourceSpec> sources;
  std::vector<std::string> label_columns = {"origin"};
  embedding::EmbeddingConfig embedding;
  std::string created_at;  ///< RFC 3339 UTC
  std::string primary_source;
  std::string metrics_source;
  std::string group_column;

  /// Throws ValidationError.
  void validate() const;

  const SourceSpec& source(const std::string& name) const;
  const std::string& resolved_primary_source() const;
  const std::string& resolved_metrics_source() const;
  std::string resolved_group_column() const;

  bool operator==(const RunManifest&) const = default;
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

std::string utc_now_rfc3339();

inline std::filesystem::path manifest_path(const std::filesystem::path& run_dir) { return run_dir / "run.json"; }

RunManifest read_manifest(const std::filesystem::path& run_dir);
/// Parses and validates a manifest document; throws ValidationError.
RunManifest parse_manifest(const std::string& text);
void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest);

}  // namespace evomon::ingest
