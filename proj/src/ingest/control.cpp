// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/ingest/control.hpp"

#include "evomon/common/error.hpp"
#include "evomon/common/fs.hpp"

namespace evomon::ingest {

std::string to_string(DesiredState s) { return s == DesiredState::paused ? "paused" : "running"; }

DesiredState desired_state_from_string(const std::string& s) {
  if (s == "running") return DesiredState::running;
  if (s == "paused") return DesiredState::paused;
  throw ValidationError("desired_state must be \"running\" or \"paused\", got \"" + s + "\"");
}

void to_json(nlohmann::json& j, const ControlState& c) {
  j = {{"desired_state", to_string(c.desired_state)}, {"revision", c.revision}, {"note", c.note}};
}

void from_json(const nlohmann::json& j, ControlState& c) {
  try {
    c.desired_state = desired_state_from_string(j.at("desired_state").get<std::string>());
    c.revision = j.value("revision", std::uint64_t{0});
    c.note = j.value("note", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed control state: ") + e.what());
  }
}

ControlState read_control(const std::filesystem::path& run_dir) {
  auto path = control_path(run_dir);
  if (!std::filesystem::exists(path)) return {};
  try {
    return nlohmann::json::parse(read_file(path)).get<ControlState>();
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_control(const std::filesystem::path& run_dir, const ControlState& state) {
  write_file_atomic(control_path(run_dir), nlohmann::json(state).dump() + "\n");
}

}  // namespace evomon::ingest
