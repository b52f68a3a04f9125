// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/ingest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "evomon/common/error.hpp"
#include "evomon/common/rng.hpp"
#include "evomon/ingest/png.hpp"

namespace evomon::ingest {

namespace {

constexpr std::size_t kDrifting = 3;  // "grey"
constexpr std::size_t kDriftTarget = 0;  // "black"
constexpr double kOffsetRatio = 0.375;

std::size_t group_count(const std::string& scenario) { return scenario == "split" ? 3 : 4; }

}  // namespace

const std::vector<std::string>& simulator_scenarios() {
  static const std::vector<std::string> names = {"split", "converge", "bias"};
  return names;
}

void SimulationSpec::validate() const {
  const auto& names = simulator_scenarios();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw ValidationError("unknown scenario '" + scenario + "' (valid: " + list + ")");
  }
  if (snapshots < 2) throw ValidationError("simulation needs T >= 2 snapshots");
  if (instances < 30) throw ValidationError("simulation needs N >= 30 instances");
  if (dims < 2) throw ValidationError("simulation needs D >= 2 dims");
  if (cadence_n < 1) throw ValidationError("cadence_n must be >= 1");
  if (static_cast<double>(snapshots - 1) * static_cast<double>(cadence_n) > 999'999'999.0)
    throw ValidationError("last training iteration does not fit in 9 digits");
  if (!(separation > 0.0)) throw ValidationError("separation must be positive");
}

Simulator::Simulator(SimulationSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.run_id.empty()) spec_.run_id = "sim-" + spec_.scenario + "-" + std::to_string(spec_.seed);

  const std::size_t n = spec_.instances, d = spec_.dims, g = group_count(spec_.scenario);
  group_names_ = g == 3 ? std::vector<std::string>{"a", "b", "c"}
                        : std::vector<std::string>{"black", "blond", "brown", "grey"};
  noise_sd_ = d <= 8 ? 1.0 : std::sqrt(8.0 / static_cast<double>(d));

  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "inst_%05zu", i);
    ids_.emplace_back(buf);
    group_of_.push_back(i % g);
    groups_.push_back(group_names_[i % g]);
    origins_.emplace_back((i / g) % 2 == 0 ? "real" : "generated");
  }

  Rng rng(spec_.seed, 0);
  base_noise_.resize(n * d);
  for (auto& v : base_noise_) v = noise_sd_ * rng.normal();
  // Remove each (group, origin) cell's sample mean so cell means sit exactly on
  // the scenario trajectory.
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < n; ++i) cells[{group_of_[i], origins_[i]}].push_back(i);
  for (const auto& [key, members] : cells) {
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (auto i : members) mean += base_noise_[i * d + j];
      mean /= static_cast<double>(members.size());
      for (auto i : members) base_noise_[i * d + j] -= mean;
    }
  }
}

std::vector<double> Simulator::center(std::size_t group) const {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(group) / static_cast<double>(group_names_.size());
  std::vector<double> c(spec_.dims, 0.0);
  c[0] = spec_.separation * std::cos(angle);
  c[1] = spec_.separation * std::sin(angle);
  return c;
}

std::vector<double> Simulator::generated_mean(std::size_t group, std::size_t t) const {
  const double s = static_cast<double>(t) / static_cast<double>(spec_.snapshots - 1);
  auto c = center(group);
  const double offset = kOffsetRatio * spec_.separation;
  if (spec_.scenario == "bias" && group == kDrifting) {
    auto target = center(kDriftTarget);
    std::vector<double> delta(c.size());
    double norm = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
      delta[j] = target[j] - c[j];
      norm += delta[j] * delta[j];
    }
    norm = std::sqrt(norm);
    // Start `offset` along the drift direction, end on the target cluster.
    const double step = offset + s * (norm - offset);
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += step * delta[j] / norm;
    return c;
  }
  const double r = offset * (1.0 - s) / spec_.separation;
  for (auto& v : c) v *= 1.0 + r;
  return c;
}

RunManifest Simulator::manifest(std::string created_at) const {
  RunManifest m;
  m.run_id = spec_.run_id;
  m.cadence_n = spec_.cadence_n;
  m.sources = {{"clip", spec_.dims}, {"disc_feat", std::max<std::size_t>(2, spec_.dims / 2)}};
  m.label_columns = {"origin", "group"};
  m.embedding.seed = spec_.seed;
  m.embedding.perplexity = std::min(30.0, std::floor(static_cast<double>(spec_.instances - 1) / 3.0));
  m.created_at = std::move(created_at);
  m.primary_source = "clip";
  m.metrics_source = "clip";
  m.group_column = "group";
  return m;
}

Snapshot Simulator::snapshot(std::size_t t) const {
  if (t >= spec_.snapshots) throw ValidationError("snapshot index out of range");
  const std::size_t n = spec_.instances, d = spec_.dims, d2 = std::max<std::size_t>(2, d / 2);
  const double s = static_cast<double>(t) / static_cast<double>(spec_.snapshots - 1);

  std::vector<std::vector<double>> real_means, gen_means;
  for (std::size_t g = 0; g < group_names_.size(); ++g) {
    if (spec_.scenario == "split") {
      auto c = center(g);
      for (auto& v : c) v *= s;
      real_means.push_back(c);
      gen_means.push_back(c);
    } else {
      real_means.push_back(center(g));
      gen_means.push_back(generated_mean(g, t));
    }
  }

  Rng jitter(spec_.seed, 1000 + t);
  std::vector<float> clip(n * d), disc(n * d2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mean = origins_[i] == "real" ? real_means[group_of_[i]] : gen_means[group_of_[i]];
    for (std::size_t j = 0; j < d; ++j)
      clip[i * d + j] = static_cast<float>(mean[j] + base_noise_[i * d + j] + 0.1 * noise_sd_ * jitter.normal());
  }
  Rng disc_rng(spec_.seed, 2000 + t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d2; ++j)
      disc[i * d2 + j] = static_cast<float>(0.5 * clip[i * d + (j % d)] + 0.05 * disc_rng.normal());

  Snapshot snap;
  snap.training_iteration = static_cast<std::int64_t>(t) * spec_.cadence_n;
  snap.features.emplace_back(ids_, d, std::move(clip), "clip");
  snap.features.emplace_back(ids_, d2, std::move(disc), "disc_feat");
  snap.labels.columns = {"origin", "group"};
  snap.labels.instance_ids = ids_;
  for (std::size_t i = 0; i < n; ++i) snap.labels.rows.push_back({origins_[i], groups_[i]});

  Rng loss_rng(spec_.seed, 3000 + t);
  snap.metrics["loss_d"] = 0.3 + 0.7 * std::exp(-2.0 * s) + 0.02 * loss_rng.normal();
  snap.metrics["loss_g"] = 1.0 + 1.5 * std::exp(-3.0 * s) + 0.05 * loss_rng.normal();

  if (spec_.thumbnails) {
    std::vector<std::uint8_t> px(64);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < px.size(); ++p)
        px[p] = static_cast<std::uint8_t>((40 * group_of_[i] + 15 * t + 7 * (p / 8 + p % 8) + 3 * (i % 16)) & 0xFF);
      snap.thumbnails[ids_[i]] = encode_gray_png(8, 8, px);
    }
  }
  return snap;
}

RunManifest simulate_run(const std::filesystem::path& out_dir, const SimulationSpec& spec) {
  Simulator sim(spec);
  if (std::filesystem::exists(manifest_path(out_dir)))
    throw ConflictError("run directory already holds a run.json: " + out_dir.string());
  auto manifest = sim.manifest();
  write_manifest(out_dir, manifest);
  for (std::size_t t = 0; t < spec.snapshots; ++t) write_snapshot(out_dir, manifest, sim.snapshot(t));
  return manifest;
}

}  // namespace evomon::ingest
