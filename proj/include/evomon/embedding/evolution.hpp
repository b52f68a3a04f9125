// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evomon/common/feature_matrix.hpp"
#include "evomon/embedding/config.hpp"
#include "evomon/embedding/kernels.hpp"

namespace evomon::embedding {

struct BandPoint {
  std::string instance_id;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const BandPoint&) const = default;
};

/// One snapshot's slice of the evolution layout.
struct BandLayout {
  std::size_t index = 0;                ///< position in the run, not the training iteration
  double center = 0.0;                  ///< index * (band_width + band_gap)
  std::int64_t training_iteration = 0;  ///< provenance only
  std::vector<BandPoint> points;

  bool operator==(const BandLayout&) const = default;
};

/**
 * Banded 2D layout of a whole run.
 *
 * Immutable once produced: append_iteration() returns a new value and copies
 * the existing bands verbatim.
 */
struct EvolutionLayout {
  EmbeddingConfig config;
  std::vector<BandLayout> bands;
  std::string config_hash;
  /// Last band that later appends may not touch; -1 when nothing is frozen
  /// (batch layouts are recomputed jointly).
  std::int64_t frozen_upto = -1;

  bool operator==(const EvolutionLayout&) const = default;
};

/// For each row of `current`, the index of the point with the same instance_id
/// in `previous`, or -1.
std::vector<std::ptrdiff_t> match_instances(std::span<const std::string> current, const BandLayout& previous);

struct AlignmentTerm {
  double penalty = 0.0;          ///< (lambda/|M|) sum_{i in M} (y_i - y_prev_i)^2
  std::vector<Point2> gradient;  ///< x components are always 0
  std::size_t matched = 0;
};

/// Vertical alignment penalty of `y` against the frozen previous band.
/// `match[i]` indexes into `previous` or is -1 for unmatched points. No matches
/// yields a zero term and an alignment-coverage warning.
AlignmentTerm alignment_gradient(std::span<const Point2> y, std::span<const std::ptrdiff_t> match,
                                 std::span<const Point2> previous, double lambda_align);

/// Optional per-step cost recording for diagnostics and tests.
struct OptimizationTrace {
  /// Un-exaggerated objective (KL terms plus alignment penalties) before the
  /// first step, then after each step.
  std::vector<double> cost;
};

/// Embeds the first snapshot into band 0.
EvolutionLayout embed_first(const FeatureMatrix& x0, const EmbeddingConfig& config,
                            std::int64_t training_iteration = 0, OptimizationTrace* trace = nullptr);

/// Progressive mode: embeds `x` into a new band aligned to the current last
/// band. Earlier bands are copied bit-for-bit.
EvolutionLayout append_iteration(const EvolutionLayout& layout, const FeatureMatrix& x, const EmbeddingConfig& config,
                                 std::int64_t training_iteration, OptimizationTrace* trace = nullptr);

/// Batch mode: all bands optimised jointly, then shifted so band 0 has mean y 0.
/// `training_iterations` may be empty (bands are then labelled 0..T-1).
EvolutionLayout batch_embed(std::span<const FeatureMatrix> snapshots, const EmbeddingConfig& config,
                            std::span<const std::int64_t> training_iterations = {},
                            OptimizationTrace* trace = nullptr);

/// Provenance digest of a config plus the ordered band contents it was applied to.
std::string compute_config_hash(const EmbeddingConfig& config, std::span<const BandLayout> bands);

/// Sum of band KL costs plus chained alignment penalties for an existing layout,
/// given the features each band was computed from.
double evolution_cost(const EvolutionLayout& layout, std::span<const FeatureMatrix> snapshots);

}  // namespace evomon::embedding
