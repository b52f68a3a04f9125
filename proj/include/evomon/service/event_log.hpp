// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace evomon::service {

enum class EventKind { snapshot_ingested, layout_updated, metrics_updated, control_changed, ingest_error };

std::string to_string(EventKind kind);

struct EventRecord {
  std::uint64_t seq = 0;  ///< 1, 2, 3, ... per run
  EventKind kind = EventKind::snapshot_ingested;
  nlohmann::json payload;
};

nlohmann::json to_json(const EventRecord& e);

/**
 * Append-only, gap-free event sequence with long-poll reads. When a path is
 * given every record is also appended to it as one JSON line.
 */
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::filesystem::path jsonl_path);

  std::uint64_t append(EventKind kind, nlohmann::json payload);

  /// Records with seq > after. Blocks up to `timeout` while there are none.
  std::vector<EventRecord> after(std::uint64_t after, std::chrono::milliseconds timeout = {}) const;

  std::uint64_t last_seq() const;

  /// Wakes all blocked readers; later reads return immediately.
  void close();

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<EventRecord> records_;
  std::ofstream sink_;
  bool closed_ = false;
};

}  // namespace evomon::service
