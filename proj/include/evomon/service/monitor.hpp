// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "evomon/ingest/manifest.hpp"
#include "evomon/service/run.hpp"

namespace evomon::service {

struct ServiceOptions {
  std::filesystem::path data_root;
  RunOptions run;
};

/// Registry of runs under `data_root`, one directory per run_id.
class MonitorService {
 public:
  /// Throws NotFoundError if data_root is not a directory.
  explicit MonitorService(ServiceOptions options);
  ~MonitorService();

  /// Opens every <data_root>/<dir>/run.json not yet registered. Directories
  /// whose manifest does not parse are skipped with a warning.
  std::vector<std::string> discover();

  /// Writes the manifest and an initial control.json, then starts the run.
  /// Throws ValidationError or ConflictError.
  std::string create_run(ingest::RunManifest manifest);

  std::vector<std::string> run_ids() const;

  /// Throws NotFoundError.
  std::shared_ptr<Run> run(const std::string& run_id) const;

  void stop();

  const ServiceOptions& options() const { return options_; }

 private:
  std::shared_ptr<Run> open(const std::filesystem::path& dir);

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Run>> runs_;
  bool stopped_ = false;
};

}  // namespace evomon::service
