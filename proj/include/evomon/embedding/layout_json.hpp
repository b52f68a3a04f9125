// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>

#include <json.hpp>

#include "evomon/embedding/evolution.hpp"

namespace evomon::embedding {

inline constexpr const char* kLayoutSchema = "evomon.layout.v1";

/// Rounds to 9 significant decimal digits (the export precision).
double round_sig9(double v);

/// Document layout:
///   {"schema": "evomon.layout.v1", "config_hash": str, "config": {...},
///    "frozen_upto": int, "bands": [{"index", "center", "x_min", "x_max",
///    "training_iteration", "count", "points": [{"id", "x", "y"}]}]}
nlohmann::json band_to_json(const BandLayout& band, const EmbeddingConfig& config);
nlohmann::json layout_to_json(const EvolutionLayout& layout);

/// Compact serialisation with a trailing newline; stable across runs.
std::string export_layout(const EvolutionLayout& layout);

EvolutionLayout layout_from_json(const nlohmann::json& doc);

}  // namespace evomon::embedding
