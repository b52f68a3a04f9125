// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/service/event_log.hpp"

namespace evomon::service {

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::snapshot_ingested: return "snapshot_ingested";
    case EventKind::layout_updated: return "layout_updated";
    case EventKind::metrics_updated: return "metrics_updated";
    case EventKind::control_changed: return "control_changed";
    case EventKind::ingest_error: return "ingest_error";
  }
  return "unknown";
}

nlohmann::json to_json(const EventRecord& e) {
  return {{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

EventLog::EventLog(std::filesystem::path jsonl_path)
    : sink_(jsonl_path, std::ios::binary | std::ios::trunc) {}

std::uint64_t EventLog::append(EventKind kind, nlohmann::json payload) {
  std::uint64_t seq;
  {
    std::lock_guard lk(mu_);
    seq = records_.size() + 1;
    records_.push_back({seq, kind, std::move(payload)});
    if (sink_.is_open()) {
      sink_ << to_json(records_.back()).dump() << '\n';
      sink_.flush();
    }
  }
  cv_.notify_all();
  return seq;
}

std::vector<EventRecord> EventLog::after(std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(mu_);
  if (timeout.count() > 0)
    cv_.wait_for(lk, timeout, [&] { return closed_ || records_.size() > after; });
  if (records_.size() <= after) return {};
  return {records_.begin() + static_cast<std::ptrdiff_t>(after), records_.end()};
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lk(mu_);
  return records_.size();
}

void EventLog::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
    if (sink_.is_open()) sink_.flush();
  }
  cv_.notify_all();
}

}  // namespace evomon::service
