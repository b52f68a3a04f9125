// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evomon/ingest/manifest.hpp"
#include "evomon/ingest/snapshot.hpp"

namespace evomon::ingest {

/**
 * Synthetic training run.
 *
 * Scenarios:
 *  - split:    3 classes start as one mixed cloud and pull apart over time.
 *  - converge: 4 groups; every generated group moves onto its real cluster.
 *  - bias:     as converge, except generated "grey" drifts from its real
 *              cluster onto real "black".
 *
 * Sources: "clip" (dims) and "disc_feat" (max(2, dims/2)). Labels: origin and
 * group. Instance ids are stable across snapshots; snapshot t has training
 * iteration t * cadence_n.
 */
struct SimulationSpec {
  std::string scenario = "split";
  std::size_t snapshots = 5;
  std::size_t instances = 150;
  std::size_t dims = 10;
  std::uint64_t seed = 42;
  std::int64_t cadence_n = 5000;
  std::string run_id;  ///< default "sim-<scenario>-<seed>"
  double separation = 8.0;  ///< distance of group centers from the origin
  bool thumbnails = true;

  /// Throws ValidationError; unknown scenarios list the valid ones.
  void validate() const;
};

const std::vector<std::string>& simulator_scenarios();

class Simulator {
 public:
  explicit Simulator(SimulationSpec spec);

  const SimulationSpec& spec() const { return spec_; }
  RunManifest manifest(std::string created_at = utc_now_rfc3339()) const;
  Snapshot snapshot(std::size_t t) const;

  const std::vector<std::string>& instance_ids() const { return ids_; }
  const std::vector<std::string>& groups() const { return groups_; }
  const std::vector<std::string>& origins() const { return origins_; }

 private:
  std::vector<double> center(std::size_t group) const;
  std::vector<double> generated_mean(std::size_t group, std::size_t t) const;

  SimulationSpec spec_;
  std::vector<std::string> ids_, groups_, origins_;
  std::vector<std::size_t> group_of_;
  std::vector<std::string> group_names_;
  std::vector<double> base_noise_;  ///< instances x dims, centered per (group, origin)
  double noise_sd_ = 1.0;
};

/// Writes run.json and every snapshot into `out_dir`.
RunManifest simulate_run(const std::filesystem::path& out_dir, const SimulationSpec& spec);

}  // namespace evomon::ingest
