// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/metrics/series.hpp"

#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "evomon/common/error.hpp"
#include "evomon/metrics/fid.hpp"
#include "evomon/metrics/neighborhood.hpp"

namespace evomon::metrics {

namespace {

constexpr const char* kSchema = "evomon.metrics.v1";

nlohmann::json optional_number(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> number_or_null(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

std::string csv_number(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", *v);
  return buf;
}

}  // namespace

MetricEntry compute_metric_entry(const SnapshotMetricsInput& input, std::size_t snapshot_index,
                                 const SeriesOptions& options) {
  if (input.features == nullptr) throw ValidationError("metrics: snapshot has no feature block");
  const FeatureMatrix& x = *input.features;
  if (input.origins.size() != x.rows() || input.groups.size() != x.rows()) {
    throw ValidationError("metrics: origin/group labels must cover every feature row");
  }

  MetricEntry entry;
  entry.snapshot_index = snapshot_index;
  entry.training_iteration = input.training_iteration;
  entry.losses = input.losses;

  std::vector<std::size_t> real_rows;
  std::map<std::string, std::vector<std::size_t>> real_by_group;
  std::map<std::string, std::vector<std::size_t>> gen_by_group;
  std::set<std::string> group_names;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    group_names.insert(input.groups[i]);
    if (input.origins[i] == "real") {
      real_rows.push_back(i);
      real_by_group[input.groups[i]].push_back(i);
    } else {
      gen_by_group[input.groups[i]].push_back(i);
    }
  }
  const FeatureMatrix real_all = x.select(real_rows);
  std::vector<std::string> real_groups;
  for (auto r : real_rows) real_groups.push_back(input.groups[r]);

  std::optional<std::vector<double>> silhouettes;
  std::unordered_map<std::string, std::size_t> band_row;
  if (input.band != nullptr) {
    std::unordered_map<std::string, std::string> labels;
    for (std::size_t i = 0; i < x.rows(); ++i) labels.emplace(x.instance_ids()[i], input.groups[i]);
    for (std::size_t i = 0; i < input.band->points.size(); ++i) band_row.emplace(input.band->points[i].instance_id, i);
    if (group_names.size() >= 2) {
      silhouettes = silhouette_values(*input.band, labels);
      double total = 0.0;
      for (double s : *silhouettes) total += s;
      entry.separation = total / static_cast<double>(silhouettes->size());
    }
  }

  for (const auto& g : group_names) {
    GroupMetrics cell;
    const auto& reals = real_by_group[g];
    const auto& gens = gen_by_group[g];
    cell.real_count = reals.size();
    cell.generated_count = gens.size();

    if (gens.empty()) {
      cell.flags.push_back("no_generated_samples");
    } else {
      if (reals.size() < 2 || gens.size() < 2) {
        cell.flags.push_back("insufficient_samples_for_fid");
      } else {
        const auto r = fid_detailed(x.select(reals), x.select(gens));
        cell.fid = r.value;
        cell.fid_epsilon_real = r.epsilon_real;
        cell.fid_epsilon_gen = r.epsilon_gen;
      }
      if (real_all.rows() < options.overlap_k) {
        cell.flags.push_back("insufficient_real_samples_for_overlap");
      } else {
        cell.overlap = neighborhood_overlap(real_all, real_groups, x.select(gens), g, options.overlap_k);
      }
    }

    if (silhouettes) {
      double total = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (input.groups[i] != g) continue;
        if (auto it = band_row.find(x.instance_ids()[i]); it != band_row.end()) {
          total += (*silhouettes)[it->second];
          ++count;
        }
      }
      if (count > 0) cell.separation = total / static_cast<double>(count);
    } else {
      cell.flags.push_back(input.band ? "single_group" : "no_layout");
    }
    entry.groups.emplace(g, std::move(cell));
  }
  return entry;
}

void append_entry(MetricSeries& series, MetricEntry entry) {
  if (!series.entries.empty()) {
    const auto& last = series.entries.back();
    if (entry.snapshot_index <= last.snapshot_index || entry.training_iteration <= last.training_iteration) {
      throw ValidationError("metrics: snapshot entries must be strictly increasing");
    }
  }
  series.entries.push_back(std::move(entry));
}

MetricSeries build_metric_series(std::span<const SnapshotMetricsInput> snapshots, const SeriesOptions& options) {
  MetricSeries series;
  for (std::size_t k = 0; k < snapshots.size(); ++k) append_entry(series, compute_metric_entry(snapshots[k], k, options));
  return series;
}

nlohmann::json metrics_to_json(const MetricSeries& series) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : series.entries) {
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [name, g] : e.groups) {
      groups[name] = {{"fid", optional_number(g.fid)},
                      {"fid_epsilon_real", g.fid_epsilon_real},
                      {"fid_epsilon_gen", g.fid_epsilon_gen},
                      {"overlap", optional_number(g.overlap)},
                      {"separation", optional_number(g.separation)},
                      {"real_count", g.real_count},
                      {"generated_count", g.generated_count},
                      {"flags", g.flags}};
    }
    entries.push_back({{"snapshot_index", e.snapshot_index},
                       {"training_iteration", e.training_iteration},
                       {"separation", optional_number(e.separation)},
                       {"losses", e.losses},
                       {"groups", std::move(groups)}});
  }
  return {{"schema", kSchema}, {"entries", std::move(entries)}};
}

MetricSeries metrics_from_json(const nlohmann::json& doc) {
  try {
    MetricSeries series;
    for (const auto& e : doc.at("entries")) {
      MetricEntry entry;
      entry.snapshot_index = e.at("snapshot_index").get<std::size_t>();
      entry.training_iteration = e.at("training_iteration").get<std::int64_t>();
      entry.separation = number_or_null(e, "separation");
      entry.losses = e.at("losses").get<std::map<std::string, double>>();
      for (const auto& [name, g] : e.at("groups").items()) {
        GroupMetrics cell;
        cell.fid = number_or_null(g, "fid");
        cell.fid_epsilon_real = g.value("fid_epsilon_real", 0.0);
        cell.fid_epsilon_gen = g.value("fid_epsilon_gen", 0.0);
        cell.overlap = number_or_null(g, "overlap");
        cell.separation = number_or_null(g, "separation");
        cell.real_count = g.value("real_count", std::size_t{0});
        cell.generated_count = g.value("generated_count", std::size_t{0});
        cell.flags = g.value("flags", std::vector<std::string>{});
        entry.groups.emplace(name, std::move(cell));
      }
      series.entries.push_back(std::move(entry));
    }
    return series;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("metrics document: ") + e.what());
  }
}

std::string metrics_to_csv(const MetricSeries& series) {
  std::ostringstream out;
  out << "snapshot_index,training_iteration,group,fid,overlap,separation\n";
  for (const auto& e : series.entries) {
    for (const auto& [name, g] : e.groups) {
      out << e.snapshot_index << ',' << e.training_iteration << ',' << name << ',' << csv_number(g.fid) << ','
          << csv_number(g.overlap) << ',' << csv_number(g.separation) << '\n';
    }
  }
  return out.str();
}

}  // namespace evomon::metrics
