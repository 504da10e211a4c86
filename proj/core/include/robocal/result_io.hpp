// SPDX-License-Identifier: Apache-2.0
//
// CalibrationResult serialization: a JSON record with the translation in
// meters, the rotation as both a unit quaternion and axis-angle, residuals,
// the observability mask and rank/condition diagnostics.
#pragma once

#include <string>

#include "robocal/solver.hpp"

namespace robocal {

std::string result_to_json(const CalibrationResult& result);
CalibrationResult result_from_json(const std::string& text,
                                   const std::string& origin = "<string>");

void write_result_file(const std::string& path, const CalibrationResult& result);
CalibrationResult read_result_file(const std::string& path);

/// One-screen human-readable summary (printed by the CLI).
std::string result_summary(const CalibrationResult& result);

}  // namespace robocal
