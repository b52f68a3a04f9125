// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/embedding/layout_json.hpp"

#include <cstdio>
#include <cstdlib>

#include "evomon/common/error.hpp"

namespace evomon::embedding {

double round_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json band_to_json(const BandLayout& band, const EmbeddingConfig& config) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : band.points) {
    points.push_back({{"id", p.instance_id}, {"x", round_sig9(p.x)}, {"y", round_sig9(p.y)}});
  }
  const double half = 0.5 * config.band_width;
  return {{"index", band.index},
          {"center", round_sig9(band.center)},
          {"x_min", round_sig9(band.center - half)},
          {"x_max", round_sig9(band.center + half)},
          {"training_iteration", band.training_iteration},
          {"count", band.points.size()},
          {"points", std::move(points)}};
}

nlohmann::json layout_to_json(const EvolutionLayout& layout) {
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : layout.bands) bands.push_back(band_to_json(b, layout.config));
  return {{"schema", kLayoutSchema},
          {"config_hash", layout.config_hash},
          {"config", layout.config},
          {"frozen_upto", layout.frozen_upto},
          {"bands", std::move(bands)}};
}

std::string export_layout(const EvolutionLayout& layout) { return layout_to_json(layout).dump() + "\n"; }

EvolutionLayout layout_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kLayoutSchema) {
      throw ValidationError("layout document: unsupported schema '" + doc.at("schema").get<std::string>() + "'");
    }
    EvolutionLayout layout;
    layout.config = doc.at("config").get<EmbeddingConfig>();
    layout.config_hash = doc.at("config_hash").get<std::string>();
    layout.frozen_upto = doc.at("frozen_upto").get<std::int64_t>();
    for (const auto& b : doc.at("bands")) {
      BandLayout band;
      band.index = b.at("index").get<std::size_t>();
      band.center = b.at("center").get<double>();
      band.training_iteration = b.at("training_iteration").get<std::int64_t>();
      for (const auto& p : b.at("points")) {
        band.points.push_back({p.at("id").get<std::string>(), p.at("x").get<double>(), p.at("y").get<double>()});
      }
      layout.bands.push_back(std::move(band));
    }
    return layout;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("layout document: ") + e.what());
  }
}

}  // namespace evomon::embedding
