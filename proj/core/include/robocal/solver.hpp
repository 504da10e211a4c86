// SPDX-License-Identifier: Apache-2.0
//
// Extrinsic solver. The unknown X is the head->device transform satisfying
// M_device = M_head * X on a common world frame, so every transition pair
// obeys A X = X B. Rotation comes from an orthogonal least-squares fit over
// the paired rotation axes (Procrustes with det +1), translation from the
// stacked linear system (I - R_A) t = t_A - R t_B, optionally augmented by
// floor-height rows (R n)^T t = h + n . (R^-1 b).
//
// Pure functions over immutable inputs; independent calibrations may run
// concurrently.
#pragma once

#include <optional>
#include <vector>

#include "robocal/session.hpp"

namespace robocal {

struct CalibrationSession {
  std::vector<Transition> transitions;
  std::vector<FloorObservation> floor_observations;
  /// Required when floor_observations is nonempty.
  std::optional<RobotKinematics> kinematics;
};

/// One k_A = R k_B constraint. Forward translations contribute their
/// normalized translation directions; near_pi marks pairs whose relative
/// axis sign is ambiguous and needs residual-based resolution.
struct AxisPair {
  Vec3 k_a;
  Vec3 k_b;
  bool near_pi = false;
};

struct RotationSolve {
  Rotation rotation;
  double rms_residual_rad = 0.0;
  /// All k_a axes were parallel: one rotational degree of freedom (about
  /// free_axis) is undetermined and the minimum-angle representative is
  /// returned.
  bool under_constrained = false;
  std::optional<Vec3> free_axis;
};

RotationSolve solve_rotation(const std::vector<AxisPair>& pairs, double rank_tolerance = 1e-8);

struct TranslationRow {
  Rotation r_a;
  Vec3 t_a;
  Vec3 t_b;
};

struct FloorRow {
  FloorObservation obs;
  RobotKinematics kin;
};

struct TranslationSolve {
  Vec3 translation = Vec3::Zero();
  double rms_residual_m = 0.0;
  /// Unit directions (head frame) carrying no constraint; the returned
  /// translation has zero component along them (minimum-norm solution).
  std::vector<Vec3> null_directions;
  /// sigma_max / sigma_min of the stacked system; infinity when rank < 3.
  double condition = 0.0;
};

/// Least squares over 3 rows per transition plus 1 row per floor
/// observation. `frozen_directions` forces additional directions into the
/// null space (used when solving structurally under-constrained sessions).
TranslationSolve solve_translation(const std::vector<TranslationRow>& rows, const Rotation& r,
                                   const std::vector<FloorRow>& floor_rows,
                                   double rank_tolerance = 1e-8,
                                   const std::vector<Vec3>& frozen_directions = {});

struct SolveConfig {
  ClassifyConfig classify{};
  double rank_tolerance = 1e-8;
  /// Structural rank threshold for deciding observability from classified
  /// axes (robust to observation noise, unlike the raw numerical rank).
  double structural_tolerance = 0.05;
  /// Return a partial (minimum-norm) result instead of throwing
  /// InsufficientMotionError when parameters are unconstrained.
  bool allow_partial = false;
};

struct RefineInfo {
  int iterations = 0;
  bool converged = true;
  double initial_objective = 0.0;
  double final_objective = 0.0;
};

struct CalibrationResult {
  Pose x;
  double rotation_residual_rad = 0.0;   // RMS angle between k_A and R k_B
  double translation_residual_m = 0.0;  // RMS over stacked scalar rows
  ParameterMask observability;
  ObservabilityReport report;
  double translation_condition = 0.0;
  bool under_constrained = false;
  std::optional<Vec3> free_rotation_axis;
  std::vector<Vec3> translation_null_directions;
  std::optional<RefineInfo> refine;
};

/// Full linear calibration: classification, axis-pair rotation solve,
/// stacked translation solve with floor rows. Throws InsufficientMotionError
/// (naming the unconstrained parameters and the motion that would fix them)
/// unless cfg.allow_partial is set.
CalibrationResult calibrate(const CalibrationSession& session, const SolveConfig& cfg = {});

struct RefineConfig {
  int max_iters = 50;
  double step_tolerance = 1e-12;
  double objective_tolerance = 1e-16;
  ClassifyConfig classify{};
  double structural_tolerance = 0.05;
};

/// Damped Gauss-Newton on the pose error E = X^-1 A^-1 X B over all usable
/// transitions, minimizing sum |[rotvec(E); trans(E)]|^2 with a 6-DoF local
/// parameterization. Never increases the objective; structurally
/// unconstrained directions are frozen at their initial values. Sets
/// refine->converged = false when max_iters is exhausted first.
CalibrationResult refine_nonlinear(const CalibrationSession& session,
                                   const CalibrationResult& initial,
                                   const RefineConfig& cfg = {});

/// Axis pairs exactly as calibrate() feeds them to solve_rotation.
std::vector<AxisPair> extract_axis_pairs(const CalibrationSession& session,
                                         const ClassifyConfig& cfg = {});

/// The refinement objective at x (sum of squared 6-vector residuals).
double axxb_objective(const CalibrationSession& session, const Pose& x);

}  // namespace robocal
