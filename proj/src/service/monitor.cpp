// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/service/monitor.hpp"

#include <algorithm>

#include "evomon/common/error.hpp"
#include "evomon/common/log.hpp"
#include "evomon/ingest/control.hpp"

namespace fs = std::filesystem;

namespace evomon::service {

MonitorService::MonitorService(ServiceOptions options) : options_(std::move(options)) {
  if (!fs::is_directory(options_.data_root))
    throw NotFoundError("data root is not a directory: " + options_.data_root.string());
}

MonitorService::~MonitorService() { stop(); }

std::shared_ptr<Run> MonitorService::open(const fs::path& dir) {
  auto run = std::make_shared<Run>(dir, options_.run);
  if (runs_.count(run->id())) throw ConflictError("run '" + run->id() + "' already registered");
  runs_.emplace(run->id(), run);
  run->start();
  return run;
}

std::vector<std::string> MonitorService::discover() {
  std::lock_guard lk(mu_);
  std::vector<std::string> opened;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(options_.data_root))
    if (entry.is_directory() && fs::exists(ingest::manifest_path(entry.path()))) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    bool known = false;
    for (const auto& [id, run] : runs_) known = known || fs::equivalent(run->dir(), dir);
    if (known) continue;
    try {
      opened.push_back(open(dir)->id());
    } catch (const std::exception& e) {
      log_warning("skipping " + dir.string() + ": " + e.what());
    }
  }
  return opened;
}

std::string MonitorService::create_run(ingest::RunManifest manifest) {
  manifest.validate();
  if (manifest.created_at.empty()) manifest.created_at = ingest::utc_now_rfc3339();
  std::lock_guard lk(mu_);
  if (stopped_) throw std::runtime_error("service is stopping");
  if (runs_.count(manifest.run_id)) throw ConflictError("run '" + manifest.run_id + "' already exists");
  auto dir = options_.data_root / manifest.run_id;
  if (fs::exists(ingest::manifest_path(dir)))
    throw ConflictError("directory for run '" + manifest.run_id + "' already holds a manifest");
  ingest::write_manifest(dir, manifest);
  ingest::write_control(dir, {});
  return open(dir)->id();
}

std::vector<std::string> MonitorService::run_ids() const {
  std::lock_guard lk(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, run] : runs_) ids.push_back(id);
  return ids;
}

std::shared_ptr<Run> MonitorService::run(const std::string& run_id) const {
  std::lock_guard lk(mu_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw NotFoundError("unknown run '" + run_id + "'");
  return it->second;
}

void MonitorService::stop() {
  std::map<std::string, std::shared_ptr<Run>> runs;
  {
    std::lock_guard lk(mu_);
    stopped_ = true;
    runs = runs_;
  }
  for (auto& [id, run] : runs) run->stop();
}

}  // namespace evomon::service
