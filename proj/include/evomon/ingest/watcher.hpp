// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evomon/ingest/manifest.hpp"
#include "evomon/ingest/snapshot.hpp"

namespace evomon::ingest {

struct WatchEvent {
  enum class Kind { snapshot, error, fatal };

  Kind kind = Kind::snapshot;
  std::int64_t training_iteration = -1;
  std::optional<Snapshot> snapshot;        ///< kind == snapshot
  std::vector<ValidationIssue> issues;     ///< kind == error
  std::string message;                     ///< error / fatal summary
};

/**
 * Polling watcher over <run_dir>/snapshots.
 *
 * Each completed snapshot directory is reported once: as a `snapshot` event if
 * it validates, otherwise as an `error` event. Data events come out in strictly
 * ascending iteration order; a snapshot that completes after a later one was
 * already emitted is reported as an `order` error. A change to run.json is
 * reported once as `fatal`, after which poll() returns nothing.
 */
class RunWatcher {
 public:
  /// Reads and validates the manifest; throws ValidationError / NotFoundError.
  explicit RunWatcher(std::filesystem::path run_dir);

  const RunManifest& manifest() const { return manifest_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }

  std::vector<WatchEvent> poll();

  bool failed() const { return failed_; }
  std::optional<std::int64_t> last_emitted() const { return last_emitted_; }

 private:
  std::filesystem::path run_dir_;
  std::string manifest_bytes_;
  RunManifest manifest_;
  std::set<std::int64_t> reported_;
  std::optional<std::int64_t> last_emitted_;
  bool failed_ = false;
};

}  // namespace evomon::ingest
