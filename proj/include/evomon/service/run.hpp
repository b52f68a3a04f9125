// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "evomon/embedding/evolution.hpp"
#include "evomon/ingest/control.hpp"
#include "evomon/ingest/manifest.hpp"
#include "evomon/ingest/snapshot.hpp"
#include "evomon/ingest/watcher.hpp"
#include "evomon/metrics/series.hpp"
#include "evomon/service/event_log.hpp"

namespace evomon::service {

enum class ProcessingStatus { idle, embedding, error };

std::string to_string(ProcessingStatus s);

/// Provenance of one published layout version (version v has v bands).
struct VersionInfo {
  std::string config_hash;
  std::int64_t frozen_upto = -1;
  std::int64_t training_iteration = 0;
};

/// Immutable published state of a run. Never modified after publication.
struct RunView {
  ingest::RunManifest manifest;
  std::shared_ptr<const embedding::EvolutionLayout> layout;  ///< null before the first snapshot
  std::vector<VersionInfo> versions;
  std::vector<std::shared_ptr<const ingest::LabelTable>> band_labels;  ///< one per band
  std::shared_ptr<const metrics::MetricSeries> metrics;
  ingest::ControlState control;
  ProcessingStatus status = ProcessingStatus::idle;
  std::string error;
  std::size_t ingest_errors = 0;

  std::size_t version() const { return versions.size(); }
};

struct RunOptions {
  std::chrono::milliseconds poll_interval{250};
  int embed_threads = 0;  ///< OpenMP threads for this run's worker; 0 = runtime default
  metrics::SeriesOptions series;
};

/// col:val equality conjunction.
using LabelFilter = std::vector<std::pair<std::string, std::string>>;

/// Parses "col:val,col:val"; throws ValidationError.
LabelFilter parse_filter(const std::string& text);

struct LayoutQuery {
  std::optional<std::size_t> from_band, to_band;  ///< inclusive
  std::optional<std::size_t> version;             ///< default: latest
  LabelFilter filter;
};

/**
 * Slice of a published layout. Bands keep their descriptors; points are
 * filtered by the band's own labels. Coordinates are copied from the stored
 * layout. Throws NotFoundError for an out-of-range band or version and
 * ValidationError for a filter on an unknown column.
 */
nlohmann::json query_layout(const RunView& view, const LayoutQuery& query);

/**
 * One monitored run: a watcher, a single embedding worker and the published
 * view. Snapshots are processed strictly in order; readers take the current
 * view without blocking the worker.
 */
class Run {
 public:
  Run(std::filesystem::path run_dir, RunOptions options);
  ~Run();

  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  const std::string& id() const { return id_; }
  const std::filesystem::path& dir() const { return dir_; }

  void start();
  void stop();

  /// Triggers an immediate rescan.
  void notify();

  std::shared_ptr<const RunView> view() const;
  const EventLog& events() const { return *events_; }

  /// Always writes control.json with revision + 1 and emits control_changed.
  ingest::ControlState set_control(ingest::DesiredState desired, std::string note);

  /// Blocks until the published view satisfies `pred` or the timeout passes.
  bool wait_for(const std::function<bool(const RunView&)>& pred, std::chrono::milliseconds timeout) const;

 private:
  void worker_loop();
  void handle(ingest::WatchEvent& event);
  void process_snapshot(const ingest::Snapshot& snapshot);
  void record_error(std::int64_t iteration, const std::string& message, nlohmann::json issues);
  void publish(std::shared_ptr<const RunView> next);
  void persist(const RunView& view);

  std::filesystem::path dir_;
  std::string id_;
  RunOptions options_;
  std::unique_ptr<ingest::RunWatcher> watcher_;
  std::unique_ptr<EventLog> events_;

  // Guards publication of view_ and serializes writers (worker, control).
  mutable std::mutex publish_mu_;
  mutable std::condition_variable published_cv_;
  std::shared_ptr<const RunView> view_;

  std::mutex wake_mu_;
  std::condition_variable wake_cv_;
  bool wake_ = false;
  bool stop_ = false;
  std::thread worker_;
};

}  // namespace evomon::service
