// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace evomon::embedding {

enum class Mode { progressive, batch };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/**
 * Every knob of the evolutionary embedding.
 *
 * Bands are laid out left to right: band k is centred at k * (band_width + band_gap)
 * and every x in it is clamped to +-band_width/2 around that centre. Within a band the
 * layout is an exact t-SNE; across consecutive bands a quadratic penalty on y keeps
 * each instance at a stable height.
 */
struct EmbeddingConfig {
  double perplexity = 30.0;
  int steps = 1000;
  double early_exaggeration_factor = 12.0;
  int early_exaggeration_steps = 250;
  double learning_rate = 200.0;
  double momentum_early = 0.5;
  double momentum_late = 0.8;
  int momentum_switch_step = 250;
  double lambda_align = 0.01;
  double band_width = 1.0;
  double band_gap = 0.5;
  std::uint64_t seed = 42;
  Mode mode = Mode::progressive;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  double band_center(std::size_t band) const { return static_cast<double>(band) * (band_width + band_gap); }

  /// Fixed-order textual form; input to the layout provenance hash.
  std::string canonical() const;

  bool operator==(const EmbeddingConfig&) const = default;
};

void to_json(nlohmann::json& j, const EmbeddingConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, EmbeddingConfig& c);

}  // namespace evomon::embedding
