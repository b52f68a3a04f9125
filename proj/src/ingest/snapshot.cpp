// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/ingest/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"
#include "evomon/common/hash.hpp"

namespace fs = std::filesystem;

namespace evomon::ingest {

namespace {

bool valid_instance_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return id.find_first_of(",/\\\r\n") == std::string::npos;
}

bool valid_cell(const std::string& v) { return v.find_first_of(",\r\n") == std::string::npos; }

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string labels_csv(const LabelTable& t) {
  std::string out = "instance_id";
  for (const auto& c : t.columns) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < t.instance_ids.size(); ++i) {
    out += t.instance_ids[i];
    for (const auto& v : t.rows[i]) out += "," + v;
    out += "\n";
  }
  return out;
}

std::string feature_file_name(const std::string& source) { return "feat_" + source + ".f32"; }

}  // namespace

std::vector<std::string> LabelTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw NotFoundError("unknown label column '" + name + "'");
  auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::map<std::string, std::string> LabelTable::column_map(const std::string& name) const {
  auto values = column(name);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < values.size(); ++i) out.emplace(instance_ids[i], values[i]);
  return out;
}

const FeatureMatrix& Snapshot::feature(const std::string& source) const {
  for (const auto& f : features)
    if (f.source_name() == source) return f;
  throw NotFoundError("snapshot has no source '" + source + "'");
}

std::string snapshot_dir_name(std::int64_t training_iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%09lld", static_cast<long long>(training_iteration));
  return buf;
}

std::optional<std::int64_t> parse_snapshot_dir_name(const std::string& name) {
  if (name.size() != 14 || name.rfind("iter_", 0) != 0) return std::nullopt;
  std::int64_t v = 0;
  for (std::size_t i = 5; i < name.size(); ++i) {
    if (name[i] < '0' || name[i] > '9') return std::nullopt;
    v = v * 10 + (name[i] - '0');
  }
  return v;
}

fs::path snapshot_dir(const fs::path& run_dir, std::int64_t training_iteration) {
  return run_dir / "snapshots" / snapshot_dir_name(training_iteration);
}

void check_snapshot(const RunManifest& manifest, const Snapshot& s) {
  if (s.training_iteration < 0 || s.training_iteration > 999'999'999)
    throw ValidationError("training_iteration out of range: " + std::to_string(s.training_iteration));
  const auto& t = s.labels;
  if (t.columns != manifest.label_columns) throw ValidationError("label columns differ from the manifest");
  if (t.rows.size() != t.instance_ids.size()) throw ValidationError("label table row count mismatch");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.instance_ids.size(); ++i) {
    const auto& id = t.instance_ids[i];
    if (!valid_instance_id(id)) throw ValidationError("invalid instance_id at row " + std::to_string(i));
    if (!seen.insert(id).second) throw ValidationError("duplicate instance_id '" + id + "'");
    if (t.rows[i].size() != t.columns.size())
      throw ValidationError("label row " + std::to_string(i) + " has the wrong number of fields");
    for (const auto& v : t.rows[i])
      if (!valid_cell(v)) throw ValidationError("label value at row " + std::to_string(i) + " contains a separator");
    if (t.rows[i][0] != "real" && t.rows[i][0] != "generated")
      throw ValidationError("origin at row " + std::to_string(i) + " must be real or generated");
  }
  if (s.features.size() != manifest.sources.size())
    throw ValidationError("snapshot has " + std::to_string(s.features.size()) + " feature blocks, manifest declares " +
                          std::to_string(manifest.sources.size()));
  for (std::size_t k = 0; k < s.features.size(); ++k) {
    const auto& f = s.features[k];
    const auto& spec = manifest.sources[k];
    if (f.source_name() != spec.name)
      throw ValidationError("feature block " + std::to_string(k) + " is '" + f.source_name() + "', expected '" +
                            spec.name + "'");
    if (f.dims() != spec.dims)
      throw ValidationError("source '" + spec.name + "' has " + std::to_string(f.dims()) + " dims, manifest says " +
                            std::to_string(spec.dims));
    if (f.instance_ids() != t.instance_ids)
      throw ValidationError("source '" + spec.name + "' instance order differs from labels");
    f.validate();
  }
  for (const auto& [name, v] : s.metrics) {
    if (name.empty()) throw ValidationError("empty metric name");
    if (!std::isfinite(v)) throw ValidationError("metric '" + name + "' is not finite");
  }
  for (const auto& [id, bytes] : s.thumbnails)
    if (!seen.count(id)) throw ValidationError("thumbnail for unknown instance '" + id + "'");
}

fs::path write_snapshot(const fs::path& run_dir, const RunManifest& manifest, const Snapshot& s) {
  check_snapshot(manifest, s);
  if (!fs::exists(manifest_path(run_dir))) throw NotFoundError("no run.json in " + run_dir.string());
  auto dir = snapshot_dir(run_dir, s.training_iteration);
  fs::create_directories(dir.parent_path());
  if (!fs::create_directory(dir))
    throw ConflictError("snapshot for iteration " + std::to_string(s.training_iteration) + " already exists");

  auto order = order_digest(s.labels.instance_ids);
  nlohmann::json meta;
  meta["iteration"] = s.training_iteration;
  meta["sources"] = nlohmann::json::array();
  for (const auto& f : s.features)
    meta["sources"].push_back(
        {{"name", f.source_name()}, {"rows", f.rows()}, {"dims", f.dims()}, {"instance_order", order}});
  meta["metrics"] = nlohmann::json::object();
  for (const auto& [name, v] : s.metrics) meta["metrics"][name] = v;

  write_file(dir / "meta.json", meta.dump(2) + "\n");
  write_file(dir / "labels.csv", labels_csv(s.labels));
  for (const auto& f : s.features) write_file(dir / feature_file_name(f.source_name()), encode_f32_le(f.data()));
  if (!s.thumbnails.empty()) {
    fs::create_directory(dir / "thumbs");
    for (const auto& [id, bytes] : s.thumbnails) write_file(dir / "thumbs" / (id + ".png"), bytes);
  }
  write_file(dir / "DONE", "");
  return dir;
}

std::string ValidationIssue::to_string() const {
  std::string out = file;
  if (row) out += ":row " + std::to_string(*row);
  out += ": [" + rule + "] " + message;
  return out;
}

ValidationReport validate_snapshot(const fs::path& dir, const RunManifest& manifest) {
  ValidationReport report;
  report.dir = dir;
  auto issue = [&](std::string file, std::optional<std::size_t> row, std::string rule, std::string message) {
    report.issues.push_back({std::move(file), row, std::move(rule), std::move(message)});
  };
  auto finish = [&]() -> ValidationReport& {
    report.status = report.issues.empty() ? SnapshotStatus::ok : SnapshotStatus::invalid;
    if (!report.issues.empty()) report.snapshot.reset();
    return report;
  };

  if (!fs::exists(dir / "DONE")) {
    report.status = SnapshotStatus::incomplete;
    report.issues.push_back({"DONE", std::nullopt, "incomplete", "sentinel missing"});
    return report;
  }
  auto iteration = parse_snapshot_dir_name(dir.filename().string());
  if (!iteration) issue(dir.filename().string(), std::nullopt, "iteration", "directory name is not iter_<9 digits>");

  Snapshot snap;
  snap.training_iteration = iteration.value_or(-1);

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(dir / "meta.json"));
    if (meta.at("iteration").get<std::int64_t>() != snap.training_iteration)
      issue("meta.json", std::nullopt, "iteration",
            "iteration " + meta.at("iteration").dump() + " does not match directory " + dir.filename().string());
    const auto metrics = meta.value("metrics", nlohmann::json::object());
    for (const auto& [name, v] : metrics.items()) {
      if (!v.is_number() || !std::isfinite(v.get<double>()))
        issue("meta.json", std::nullopt, "value", "metric '" + name + "' is not a finite number");
      else
        snap.metrics[name] = v.get<double>();
    }
  } catch (const std::exception& e) {
    issue("meta.json", std::nullopt, "meta", e.what());
    return finish();
  }

  // labels.csv
  std::string labels_text;
  try {
    labels_text = read_file(dir / "labels.csv");
  } catch (const std::exception& e) {
    issue("labels.csv", std::nullopt, "schema", e.what());
    return finish();
  }
  {
    std::istringstream in(labels_text);
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_csv_line(line);
    if (header.empty() || header[0] != "instance_id") {
      issue("labels.csv", std::nullopt, "schema", "header must start with instance_id");
      return finish();
    }
    std::vector<std::string> columns(header.begin() + 1, header.end());
    bool schema_ok = true;
    for (const auto& c : columns)
      if (std::find(manifest.label_columns.begin(), manifest.label_columns.end(), c) == manifest.label_columns.end()) {
        issue("labels.csv", std::nullopt, "schema", "unknown label column '" + c + "'");
        schema_ok = false;
      }
    for (const auto& c : manifest.label_columns)
      if (std::find(columns.begin(), columns.end(), c) == columns.end()) {
        issue("labels.csv", std::nullopt, "schema", "missing label column '" + c + "'");
        schema_ok = false;
      }
    if (schema_ok && columns != manifest.label_columns) {
      issue("labels.csv", std::nullopt, "schema", "label columns are not in manifest order");
      schema_ok = false;
    }
    if (!schema_ok) return finish();
    snap.labels.columns = columns;
    std::set<std::string> seen;
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != header.size()) {
        issue("labels.csv", row, "schema",
              "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
      } else if (!valid_instance_id(fields[0])) {
        issue("labels.csv", row, "schema", "invalid instance_id");
      } else if (!seen.insert(fields[0]).second) {
        issue("labels.csv", row, "duplicate_id", "duplicate instance_id '" + fields[0] + "'");
      } else if (fields[1] != "real" && fields[1] != "generated") {
        issue("labels.csv", row, "origin", "origin must be real or generated, got '" + fields[1] + "'");
      }
      snap.labels.instance_ids.push_back(fields[0]);
      fields.erase(fields.begin());
      snap.labels.rows.push_back(std::move(fields));
      ++row;
    }
  }
  const std::size_t n = snap.labels.instance_ids.size();
  const auto digest = order_digest(snap.labels.instance_ids);

  // feature blocks
  const auto msources = meta.value("sources", nlohmann::json::array());
  if (!msources.is_array() || msources.size() != manifest.sources.size()) {
    issue("meta.json", std::nullopt, "schema", "sources do not match the manifest");
    return finish();
  }
  for (std::size_t k = 0; k < manifest.sources.size(); ++k) {
    const auto& spec = manifest.sources[k];
    const auto& ms = msources[k];
    const auto file = feature_file_name(spec.name);
    if (ms.value("name", std::string()) != spec.name) {
      issue("meta.json", std::nullopt, "schema", "source " + std::to_string(k) + " should be '" + spec.name + "'");
      continue;
    }
    if (ms.value("dims", std::size_t{0}) != spec.dims)
      issue("meta.json", std::nullopt, "schema", "source '" + spec.name + "' dims differ from the manifest");
    if (ms.value("rows", std::size_t{0}) != n)
      issue("meta.json", std::nullopt, "rows",
            "source '" + spec.name + "' declares " + ms.value("rows", nlohmann::json()).dump() + " rows, labels have " +
                std::to_string(n));
    if (ms.contains("instance_order") && ms["instance_order"] != digest)
      issue(file, std::nullopt, "order", "instance order of '" + spec.name + "' differs from labels.csv");

    std::string bytes;
    try {
      bytes = read_file(dir / file);
    } catch (const std::exception&) {
      issue(file, std::nullopt, "size", "feature file missing");
      continue;
    }
    const std::size_t expected = 4 * n * spec.dims;
    if (bytes.size() != expected) {
      issue(file, std::nullopt, "size",
            "byte length " + std::to_string(bytes.size()) + " != 4*N*D = " + std::to_string(expected));
      continue;
    }
    auto values = decode_f32_le(bytes);
    for (std::size_t i = 0; i < values.size(); ++i)
      if (!std::isfinite(values[i])) {
        issue(file, i / spec.dims, "value", "non-finite value in column " + std::to_string(i % spec.dims));
        break;
      }
    if (report.issues.empty())
      snap.features.emplace_back(snap.labels.instance_ids, spec.dims, std::move(values), spec.name);
  }

  if (fs::is_directory(dir / "thumbs")) {
    std::set<std::string> ids(snap.labels.instance_ids.begin(), snap.labels.instance_ids.end());
    for (const auto& entry : fs::directory_iterator(dir / "thumbs")) {
      auto name = entry.path().filename().string();
      if (entry.path().extension() != ".png") continue;
      auto id = entry.path().stem().string();
      if (!ids.count(id)) {
        issue("thumbs/" + name, std::nullopt, "schema", "thumbnail for unknown instance '" + id + "'");
        continue;
      }
      snap.thumbnails[id] = read_file(entry.path());
    }
  }

  report.snapshot = std::move(snap);
  return finish();
}

}  // namespace evomon::ingest
