// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "evomon/service/monitor.hpp"

namespace evomon::service {

/**
 * JSON-over-HTTP front end for a MonitorService.
 *
 *   POST /runs                               manifest -> {"run_id"}
 *   GET  /runs                               run summaries
 *   GET  /runs/{id}                          one summary
 *   POST /runs/{id}/snapshots/notify         rescan now
 *   GET  /runs/{id}/layout?from=&to=&version=&filter=col:val,...
 *   GET  /runs/{id}/metrics, /runs/{id}/metrics.csv
 *   GET  /runs/{id}/control, POST /runs/{id}/control {"desired_state","note"}
 *   GET  /runs/{id}/events?after=&timeout_ms=
 *   GET  /runs/{id}/thumbs/{iteration}/{instance_id}
 *
 * Errors are {"error": message} with 400 (validation), 404, 409 or 500.
 */
class HttpServer {
 public:
  explicit HttpServer(MonitorService& service, std::chrono::milliseconds max_long_poll = std::chrono::seconds(30));
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws if the address is busy.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Requires a successful bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Summary document used by GET /runs and GET /runs/{id}.
nlohmann::json run_summary(const RunView& view);

}  // namespace evomon::service
