// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

namespace evomon::ingest {

enum class DesiredState { running, paused };

std::string to_string(DesiredState s);
DesiredState desired_state_from_string(const std::string& s);

/// What the trainer should be doing. The trainer polls <run_dir>/control.json
/// between batches; `revision` increases on every write.
struct ControlState {
  DesiredState desired_state = DesiredState::running;
  std::uint64_t revision = 0;
  std::string note;

  bool operator==(const ControlState&) const = default;
};

void to_json(nlohmann::json& j, const ControlState& c);
void from_json(const nlohmann::json& j, ControlState& c);

inline std::filesystem::path control_path(const std::filesystem::path& run_dir) { return run_dir / "control.json"; }

/// Missing file reads as {running, 0}.
ControlState read_control(const std::filesystem::path& run_dir);

/// Atomic temp-file + rename replacement.
void write_control(const std::filesystem::path& run_dir, const ControlState& state);

}  // namespace evomon::ingest
