// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/ingest/watcher.hpp"

#include <map>

#include "evomon/common/fs.hpp"

namespace fs = std::filesystem;

namespace evomon::ingest {

RunWatcher::RunWatcher(fs::path run_dir) : run_dir_(std::move(run_dir)) {
  manifest_bytes_ = read_file(manifest_path(run_dir_));
  manifest_ = parse_manifest(manifest_bytes_);
}

std::vector<WatchEvent> RunWatcher::poll() {
  std::vector<WatchEvent> events;
  if (failed_) return events;

  std::string current;
  try {
    current = read_file(manifest_path(run_dir_));
  } catch (const std::exception&) {
    current.clear();
  }
  if (current != manifest_bytes_) {
    failed_ = true;
    WatchEvent e;
    e.kind = WatchEvent::Kind::fatal;
    e.message = "run.json changed or disappeared while the run was being watched";
    events.push_back(std::move(e));
    return events;
  }

  std::map<std::int64_t, fs::path> pending;
  std::error_code ec;
  fs::directory_iterator it(run_dir_ / "snapshots", ec);
  if (ec) return events;
  for (const auto& entry : it) {
    if (!entry.is_directory()) continue;
    auto iter = parse_snapshot_dir_name(entry.path().filename().string());
    if (!iter || reported_.count(*iter)) continue;
    if (!fs::exists(entry.path() / "DONE")) continue;
    pending.emplace(*iter, entry.path());
  }

  for (const auto& [iter, dir] : pending) {
    reported_.insert(iter);
    WatchEvent e;
    e.training_iteration = iter;
    if (last_emitted_ && iter <= *last_emitted_) {
      e.kind = WatchEvent::Kind::error;
      e.issues.push_back({dir.filename().string(), std::nullopt, "order",
                          "completed after iteration " + std::to_string(*last_emitted_) + " was accepted"});
      e.message = e.issues.back().to_string();
      events.push_back(std::move(e));
      continue;
    }
    auto report = validate_snapshot(dir, manifest_);
    if (report.status == SnapshotStatus::ok) {
      e.kind = WatchEvent::Kind::snapshot;
      e.snapshot = std::move(report.snapshot);
      last_emitted_ = iter;
    } else {
      e.kind = WatchEvent::Kind::error;
      e.issues = std::move(report.issues);
      e.message = dir.filename().string() + ": " + std::to_string(e.issues.size()) + " validation issue(s); first: " +
                  e.issues.front().to_string();
    }
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace evomon::ingest
