// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/service/run.hpp"

#include <algorithm>

#include <omp.h>

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"
#include "evomon/common/log.hpp"
#include "evomon/embedding/layout_json.hpp"

namespace fs = std::filesystem;

namespace evomon::service {

std::string to_string(ProcessingStatus s) {
  switch (s) {
    case ProcessingStatus::idle: return "idle";
    case ProcessingStatus::embedding: return "embedding";
    case ProcessingStatus::error: return "error";
  }
  return "unknown";
}

LabelFilter parse_filter(const std::string& text) {
  LabelFilter out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto term = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    auto colon = term.find(':');
    if (colon == std::string::npos || colon == 0)
      throw ValidationError("filter term '" + term + "' is not col:val");
    out.emplace_back(term.substr(0, colon), term.substr(colon + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

nlohmann::json query_layout(const RunView& view, const LayoutQuery& q) {
  const std::size_t latest = view.version();
  const std::size_t v = q.version.value_or(latest);
  if (v > latest || (q.version && v == 0))
    throw NotFoundError("layout version " + std::to_string(v) + " does not exist (latest " + std::to_string(latest) +
                        ")");
  for (const auto& [col, val] : q.filter)
    if (std::find(view.manifest.label_columns.begin(), view.manifest.label_columns.end(), col) ==
        view.manifest.label_columns.end())
      throw ValidationError("filter on unknown label column '" + col + "'");

  const auto& config = view.layout ? view.layout->config : view.manifest.embedding;
  nlohmann::json doc = {{"schema", embedding::kLayoutSchema},
                        {"run_id", view.manifest.run_id},
                        {"version", v},
                        {"band_count", v},
                        {"config_hash", v ? view.versions[v - 1].config_hash : std::string()},
                        {"config", config},
                        {"frozen_upto", v ? view.versions[v - 1].frozen_upto : std::int64_t{-1}},
                        {"bands", nlohmann::json::array()}};
  if (v == 0) {
    if (q.from_band || q.to_band) throw NotFoundError("run has no bands yet");
    return doc;
  }
  const std::size_t from = q.from_band.value_or(0), to = q.to_band.value_or(v - 1);
  if (from > to || to >= v)
    throw NotFoundError("band range [" + std::to_string(from) + ", " + std::to_string(to) + "] outside [0, " +
                        std::to_string(v - 1) + "]");

  for (std::size_t b = from; b <= to; ++b) {
    const auto& band = view.layout->bands[b];
    auto j = embedding::band_to_json(band, config);
    if (!q.filter.empty()) {
      const auto& labels = *view.band_labels[b];
      std::vector<std::size_t> cols;
      for (const auto& [col, val] : q.filter)
        cols.push_back(static_cast<std::size_t>(
            std::find(labels.columns.begin(), labels.columns.end(), col) - labels.columns.begin()));
      auto kept = nlohmann::json::array();
      auto& points = j["points"];
      for (std::size_t i = 0; i < points.size(); ++i) {
        bool match = true;
        for (std::size_t f = 0; f < cols.size() && match; ++f)
          match = labels.rows[i][cols[f]] == q.filter[f].second;
        if (match) kept.push_back(std::move(points[i]));
      }
      j["total_count"] = j["count"];
      j["count"] = kept.size();
      j["points"] = std::move(kept);
    }
    doc["bands"].push_back(std::move(j));
  }
  return doc;
}

Run::Run(fs::path run_dir, RunOptions options) : dir_(std::move(run_dir)), options_(options) {
  watcher_ = std::make_unique<ingest::RunWatcher>(dir_);
  id_ = watcher_->manifest().run_id;
  if (!fs::exists(ingest::control_path(dir_))) ingest::write_control(dir_, {});
  auto view = std::make_shared<RunView>();
  view->manifest = watcher_->manifest();
  view->control = ingest::read_control(dir_);
  view->metrics = std::make_shared<metrics::MetricSeries>();
  view_ = std::move(view);
  events_ = std::make_unique<EventLog>(dir_ / "events.jsonl");
}

Run::~Run() { stop(); }

void Run::start() {
  if (worker_.joinable()) return;
  worker_ = std::thread([this] { worker_loop(); });
}

void Run::stop() {
  {
    std::lock_guard lk(wake_mu_);
    stop_ = true;
  }
  wake_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  events_->close();
}

void Run::notify() {
  {
    std::lock_guard lk(wake_mu_);
    wake_ = true;
  }
  wake_cv_.notify_all();
}

std::shared_ptr<const RunView> Run::view() const { return std::atomic_load(&view_); }

bool Run::wait_for(const std::function<bool(const RunView&)>& pred, std::chrono::milliseconds timeout) const {
  std::unique_lock lk(publish_mu_);
  return published_cv_.wait_for(lk, timeout, [&] { return pred(*view_); });
}

void Run::publish(std::shared_ptr<const RunView> next) {
  std::atomic_store(&view_, std::move(next));
  published_cv_.notify_all();
}

void Run::worker_loop() {
  if (options_.embed_threads > 0) omp_set_num_threads(options_.embed_threads);
  while (true) {
    std::vector<ingest::WatchEvent> batch;
    try {
      batch = watcher_->poll();
    } catch (const std::exception& e) {
      record_error(-1, std::string("scan failed: ") + e.what(), nlohmann::json::array());
    }
    for (auto& e : batch) {
      {
        std::lock_guard lk(wake_mu_);
        if (stop_) return;
      }
      handle(e);
    }
    std::unique_lock lk(wake_mu_);
    wake_cv_.wait_for(lk, options_.poll_interval, [&] { return stop_ || wake_; });
    if (stop_) return;
    wake_ = false;
  }
}

void Run::handle(ingest::WatchEvent& e) {
  using Kind = ingest::WatchEvent::Kind;
  if (e.kind == Kind::snapshot) {
    process_snapshot(*e.snapshot);
    return;
  }
  auto issues = nlohmann::json::array();
  for (const auto& i : e.issues) {
    nlohmann::json ji = {{"file", i.file}, {"rule", i.rule}, {"message", i.message}};
    ji["row"] = i.row ? nlohmann::json(*i.row) : nlohmann::json(nullptr);
    issues.push_back(std::move(ji));
  }
  record_error(e.training_iteration, e.message, std::move(issues));
}

void Run::record_error(std::int64_t iteration, const std::string& message, nlohmann::json issues) {
  log_warning("run " + id_ + ": " + message);
  std::lock_guard lk(publish_mu_);
  auto next = std::make_shared<RunView>(*view_);
  next->status = ProcessingStatus::error;
  next->error = message;
  next->ingest_errors += 1;
  publish(next);
  nlohmann::json payload = {{"message", message}, {"issues", std::move(issues)}, {"fatal", watcher_->failed()}};
  payload["iteration"] = iteration >= 0 ? nlohmann::json(iteration) : nlohmann::json(nullptr);
  events_->append(EventKind::ingest_error, std::move(payload));
}

void Run::process_snapshot(const ingest::Snapshot& snap) {
  const auto iteration = snap.training_iteration;
  std::shared_ptr<const RunView> current;
  {
    std::lock_guard lk(publish_mu_);
    events_->append(EventKind::snapshot_ingested,
                    {{"iteration", iteration}, {"rows", snap.labels.instance_ids.size()}});
    auto next = std::make_shared<RunView>(*view_);
    next->status = ProcessingStatus::embedding;
    current = next;
    publish(std::move(next));
  }

  const auto& manifest = current->manifest;
  embedding::EvolutionLayout layout;
  metrics::MetricEntry entry;
  try {
    const auto& x = snap.feature(manifest.resolved_primary_source());
    layout = current->layout ? embedding::append_iteration(*current->layout, x, manifest.embedding, iteration)
                             : embedding::embed_first(x, manifest.embedding, iteration);
    auto origins = snap.labels.column("origin");
    auto groups = snap.labels.column(manifest.resolved_group_column());
    metrics::SnapshotMetricsInput input;
    input.training_iteration = iteration;
    input.features = &snap.feature(manifest.resolved_metrics_source());
    input.origins = origins;
    input.groups = groups;
    input.losses = snap.metrics;
    input.band = &layout.bands.back();
    entry = metrics::compute_metric_entry(input, layout.bands.size() - 1, options_.series);
  } catch (const std::exception& e) {
    record_error(iteration, std::string("embedding failed: ") + e.what(), nlohmann::json::array());
    return;
  }

  std::lock_guard lk(publish_mu_);
  auto next = std::make_shared<RunView>(*view_);
  auto series = std::make_shared<metrics::MetricSeries>(*next->metrics);
  metrics::append_entry(*series, entry);
  next->metrics = std::move(series);
  next->versions.push_back({layout.config_hash, layout.frozen_upto, iteration});
  next->band_labels.push_back(std::make_shared<ingest::LabelTable>(snap.labels));
  next->layout = std::make_shared<embedding::EvolutionLayout>(std::move(layout));
  next->status = ProcessingStatus::idle;
  next->error.clear();
  try {
    persist(*next);
  } catch (const std::exception& e) {
    log_warning("run " + id_ + ": cannot persist derived files: " + e.what());
  }
  const auto version = next->version();
  const auto hash = next->layout->config_hash;
  publish(std::move(next));
  events_->append(EventKind::layout_updated, {{"iteration", iteration}, {"version", version}, {"config_hash", hash}});
  events_->append(EventKind::metrics_updated, {{"iteration", iteration}, {"entries", version}});
}

void Run::persist(const RunView& view) {
  write_file_atomic(dir_ / "layout.json", embedding::export_layout(*view.layout));
  write_file_atomic(dir_ / "metrics.json", metrics::metrics_to_json(*view.metrics).dump() + "\n");
}

ingest::ControlState Run::set_control(ingest::DesiredState desired, std::string note) {
  std::lock_guard lk(publish_mu_);
  ingest::ControlState state{desired, view_->control.revision + 1, std::move(note)};
  ingest::write_control(dir_, state);
  auto next = std::make_shared<RunView>(*view_);
  next->control = state;
  publish(std::move(next));
  events_->append(EventKind::control_changed, state);
  return state;
}

}  // namespace evomon::service
