// SPDX-License-Identifier: Apache-2.0
//
// Experiment drivers shared by the CLI and the test suites: single simulated
// calibrations, Monte-Carlo studies with per-trial error statistics against
// the ground-truth extrinsic, and the shake-experiment CSV.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "robocal/scenario.hpp"

namespace robocal {

struct SimCalibration {
  CalibrationResult result;
  CalibrationSession session;
  ScriptRun run;
};

/// Simulate the scenario's script with the given seed, build the session and
/// calibrate (optionally followed by the nonlinear refinement).
SimCalibration calibrate_simulated(const Scenario& scenario, std::uint64_t seed,
                                   bool refine = true, bool allow_partial = false);

struct TrialStats {
  int trial = 0;
  bool ok = false;
  std::string error;             // set when !ok
  double pos_error_m = 0.0;      // |t_est - t_true|
  double angle_error_x_rad = 0.0;  // angle between estimated and true frame axes
  double angle_error_y_rad = 0.0;
  double angle_error_z_rad = 0.0;
  double rotation_residual_rad = 0.0;
  double translation_residual_m = 0.0;
};

struct MonteCarloOptions {
  int trials = 5;
  std::uint64_t seed = 1;  // trial i uses seed + i
  int jobs = 0;            // 0 = hardware concurrency
  bool refine = true;
};

/// Independent trials fan out to a worker pool; results are indexed by trial
/// so the output is deterministic regardless of scheduling.
std::vector<TrialStats> monte_carlo(const Scenario& scenario, const MonteCarloOptions& options);

struct SummaryStat {
  double mean = 0.0;
  double median = 0.0;
};

struct MonteCarloSummary {
  SummaryStat pos_error_m;
  SummaryStat angle_error_x_rad;
  SummaryStat angle_error_y_rad;
  SummaryStat angle_error_z_rad;
  int trials = 0;
  int failures = 0;
};

MonteCarloSummary summarize(const std::vector<TrialStats>& trials);

void write_trials_csv(std::ostream& out, const std::vector<TrialStats>& trials);
std::vector<TrialStats> read_trials_csv(std::istream& in, const std::string& origin = "<stream>");

/// Mean/median rows in a fixed-width table, one block per label.
std::string summary_text(const std::string& label, const MonteCarloSummary& summary);

void write_correction_csv(std::ostream& out, const std::vector<CorrectionRecord>& records);

/// Per-axis angle error between two rotations: the angle between r_a * e and
/// r_b * e for basis axis e.
double axis_angle_error(const Rotation& r_a, const Rotation& r_b, int axis);

}  // namespace robocal
