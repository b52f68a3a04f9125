// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/embedding/config.hpp"

#include <cmath>
#include <cstdio>

#include "evomon/common/error.hpp"

namespace evomon::embedding {

std::string to_string(Mode mode) { return mode == Mode::batch ? "batch" : "progressive"; }

Mode mode_from_string(const std::string& name) {
  if (name == "progressive") return Mode::progressive;
  if (name == "batch") return Mode::batch;
  throw ConfigError("unknown embedding mode '" + name + "' (expected progressive or batch)");
}

void EmbeddingConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("embedding config: ") + what);
  };
  require(std::isfinite(perplexity) && perplexity > 1.0, "perplexity must be > 1");
  require(steps > 0, "steps must be positive");
  require(early_exaggeration_factor >= 1.0, "early_exaggeration_factor must be >= 1");
  require(early_exaggeration_steps >= 0 && early_exaggeration_steps <= steps,
          "early_exaggeration_steps must lie in [0, steps]");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be positive");
  require(momentum_early >= 0.0 && momentum_early < 1.0, "momentum_early must lie in [0, 1)");
  require(momentum_late >= 0.0 && momentum_late < 1.0, "momentum_late must lie in [0, 1)");
  require(momentum_switch_step >= 0, "momentum_switch_step must be >= 0");
  require(std::isfinite(lambda_align) && lambda_align >= 0.0, "lambda_align must be >= 0");
  require(std::isfinite(band_width) && band_width > 0.0, "band_width must be positive");
  require(std::isfinite(band_gap) && band_gap >= 0.0, "band_gap must be >= 0");
}

std::string EmbeddingConfig::canonical() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "perplexity=%.17g;steps=%d;ee_factor=%.17g;ee_steps=%d;lr=%.17g;mom_early=%.17g;"
                "mom_late=%.17g;mom_switch=%d;lambda=%.17g;width=%.17g;gap=%.17g;seed=%llu;mode=%s",
                perplexity, steps, early_exaggeration_factor, early_exaggeration_steps, learning_rate,
                momentum_early, momentum_late, momentum_switch_step, lambda_align, band_width, band_gap,
                static_cast<unsigned long long>(seed), to_string(mode).c_str());
  return buf;
}

void to_json(nlohmann::json& j, const EmbeddingConfig& c) {
  j = nlohmann::json{{"perplexity", c.perplexity},
                     {"steps", c.steps},
                     {"early_exaggeration_factor", c.early_exaggeration_factor},
                     {"early_exaggeration_steps", c.early_exaggeration_steps},
                     {"learning_rate", c.learning_rate},
                     {"momentum_early", c.momentum_early},
                     {"momentum_late", c.momentum_late},
                     {"momentum_switch_step", c.momentum_switch_step},
                     {"lambda_align", c.lambda_align},
                     {"band_width", c.band_width},
                     {"band_gap", c.band_gap},
                     {"seed", c.seed},
                     {"mode", to_string(c.mode)}};
}

void from_json(const nlohmann::json& j, EmbeddingConfig& c) {
  auto get = [&j](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) it->get_to(field);
  };
  get("perplexity", c.perplexity);
  get("steps", c.steps);
  get("early_exaggeration_factor", c.early_exaggeration_factor);
  get("early_exaggeration_steps", c.early_exaggeration_steps);
  get("learning_rate", c.learning_rate);
  get("momentum_early", c.momentum_early);
  get("momentum_late", c.momentum_late);
  get("momentum_switch_step", c.momentum_switch_step);
  get("lambda_align", c.lambda_align);
  get("band_width", c.band_width);
  get("band_gap", c.band_gap);
  get("seed", c.seed);
  if (auto it = j.find("mode"); it != j.end()) c.mode = mode_from_string(it->get<std::string>());
}

}  // namespace evomon::embedding
