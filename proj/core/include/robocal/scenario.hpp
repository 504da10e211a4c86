// SPDX-License-Identifier: Apache-2.0
//
// Scenario files describe one simulated experiment as JSON: a noise block
// (keys mirroring the simulation noise table), the ground-truth extrinsic,
// the motion script, shake parameters and the seed. See the README for the
// full schema and an annotated example. Built-in scenarios cover the
// standard calibration motions and the head-shake experiment.
#pragma once

#include <string>
#include <vector>

#include "robocal/online.hpp"
#include "robocal/simulator.hpp"

namespace robocal {

struct Scenario {
  std::string name = "custom";
  SimConfig sim{};
  MotionScript script;
  SessionBuildConfig session{};
  ShakeParams shake{};
  CorrectionConfig correction{};
};

/// Parse a scenario from JSON text. Unknown keys are rejected; omitted noise
/// keys keep their defaults.
Scenario parse_scenario_json(const std::string& text, const std::string& origin = "<string>");

std::string scenario_to_json(const Scenario& scenario);

std::vector<std::string> builtin_scenario_names();
bool is_builtin_scenario(const std::string& name);
Scenario builtin_scenario(const std::string& name);

/// Loads a built-in scenario by name, or parses the JSON file at the path.
Scenario load_scenario(const std::string& name_or_path);

}  // namespace robocal
