// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/ingest/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <set>

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"

namespace evomon::ingest {

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

void RunManifest::validate() const {
  if (!valid_name(run_id)) throw ValidationError("run_id must be non-empty and use [A-Za-z0-9_.-]");
  if (cadence_n < 1) throw ValidationError("cadence_n must be >= 1");
  if (sources.empty()) throw ValidationError("manifest declares no sources");
  std::set<std::string> names;
  for (const auto& s : sources) {
    if (!valid_name(s.name)) throw ValidationError("invalid source name '" + s.name + "'");
    if (s.dims == 0) throw ValidationError("source '" + s.name + "' has zero dims");
    if (!names.insert(s.name).second) throw ValidationError("duplicate source name '" + s.name + "'");
  }
  if (label_columns.empty() || label_columns.front() != "origin")
    throw ValidationError("label_columns must start with \"origin\"");
  std::set<std::string> cols;
  for (const auto& c : label_columns) {
    if (c.empty() || c.find(',') != std::string::npos || c == "instance_id")
      throw ValidationError("invalid label column '" + c + "'");
    if (!cols.insert(c).second) throw ValidationError("duplicate label column '" + c + "'");
  }
  if (!primary_source.empty() && !names.count(primary_source))
    throw ValidationError("primary_source '" + primary_source + "' is not a declared source");
  if (!metrics_source.empty() && !names.count(metrics_source))
    throw ValidationError("metrics_source '" + metrics_source + "' is not a declared source");
  if (!group_column.empty() && !cols.count(group_column))
    throw ValidationError("group_column '" + group_column + "' is not a label column");
  try {
    embedding.validate();
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("embedding: ") + e.what());
  }
}

const SourceSpec& RunManifest::source(const std::string& name) const {
  for (const auto& s : sources)
    if (s.name == name) return s;
  throw NotFoundError("unknown source '" + name + "'");
}

const std::string& RunManifest::resolved_primary_source() const {
  return primary_source.empty() ? sources.at(0).name : primary_source;
}

const std::string& RunManifest::resolved_metrics_source() const {
  return metrics_source.empty() ? resolved_primary_source() : metrics_source;
}

std::string RunManifest::resolved_group_column() const {
  if (!group_column.empty()) return group_column;
  if (std::find(label_columns.begin(), label_columns.end(), "group") != label_columns.end()) return "group";
  return label_columns.size() > 1 ? label_columns[1] : std::string("origin");
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json::object();
  j["run_id"] = m.run_id;
  j["cadence_n"] = m.cadence_n;
  auto sources = nlohmann::json::array();
  for (const auto& s : m.sources) sources.push_back({{"name", s.name}, {"dims", s.dims}});
  j["sources"] = std::move(sources);
  j["label_columns"] = m.label_columns;
  j["embedding"] = m.embedding;
  j["created_at"] = m.created_at;
  if (!m.primary_source.empty()) j["primary_source"] = m.primary_source;
  if (!m.metrics_source.empty()) j["metrics_source"] = m.metrics_source;
  if (!m.group_column.empty()) j["group_column"] = m.group_column;
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.cadence_n = j.value("cadence_n", std::int64_t{5000});
    m.sources.clear();
    for (const auto& s : j.at("sources")) m.sources.push_back({s.at("name").get<std::string>(), s.at("dims").get<std::size_t>()});
    m.label_columns = j.value("label_columns", std::vector<std::string>{"origin"});
    m.embedding = j.contains("embedding") ? j.at("embedding").get<embedding::EmbeddingConfig>()
                                          : embedding::EmbeddingConfig{};
    m.created_at = j.value("created_at", std::string());
    m.primary_source = j.value("primary_source", std::string());
    m.metrics_source = j.value("metrics_source", std::string());
    m.group_column = j.value("group_column", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw ValidationError(std::string("embedding: ") + e.what());
  }
}

std::string utc_now_rfc3339() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RunManifest parse_manifest(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  auto m = j.get<RunManifest>();
  m.validate();
  return m;
}

RunManifest read_manifest(const std::filesystem::path& run_dir) {
  return parse_manifest(read_file(manifest_path(run_dir)));
}

void write_manifest(const std::filesystem::path& run_dir, const RunManifest& manifest) {
  manifest.validate();
  std::filesystem::create_directories(run_dir);
  write_file_atomic(manifest_path(run_dir), nlohmann::json(manifest).dump(2) + "\n");
}

}  // namespace evomon::ingest
