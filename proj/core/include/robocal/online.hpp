// SPDX-License-Identifier: Apache-2.0
//
// Online vertical-consistency correction: the localized robot's up vector is
// rotated onto the observed floor normal, which cancels the tilt-induced,
// height-proportional part of the planar localization error. Only the two
// tilt degrees of freedom are affected; rotation about the floor normal and
// translation drift are untouched.
//
// CorrectionState is owned by a single consumer; correction_step is a pure
// state transition (old state in, new state out) so runs can be replayed.
#pragma once

#include <vector>

#include "robocal/session.hpp"

namespace robocal {

struct LocalizedFootprint {
  Pose foot_pose;   // map frame
  Vec3 up_vector;   // foot-frame z axis expressed in the map frame, unit
};

/// Chains the device pose through the extrinsic and the encoder-derived
/// kinematics: foot = device * x^-1 * head_to_foot_chain. The chain argument
/// is the full head->foot pose from forward kinematics.
LocalizedFootprint localize_footprint(const Pose& device_pose_in_map, const Pose& x,
                                      const Pose& head_to_foot_chain);

struct CorrectionConfig {
  /// Instantaneous corrections above this angle are rejected as anomalies
  /// (likely a wrong floor estimate), leaving the state unchanged.
  double max_correction = 0.5;  // rad
  /// Exponential smoothing factor in [0, 1]; 1 applies the instantaneous
  /// correction directly.
  double smoothing = 1.0;
};

struct Correction {
  Rotation r_add;
  double angle = 0.0;
  bool anomalous_tilt = false;  // above max_correction; r_add left identity
  bool degenerate = false;      // antiparallel inputs, axis ambiguous
};

/// The rotation taking n_prime onto n_observed, with its angle equal to the
/// angle between them. Post-condition r_add * n' == n is checked numerically.
Correction compute_correction(const Vec3& n_observed, const Vec3& n_prime,
                              const CorrectionConfig& cfg = {});

/// R_add applied to the observed device->foot vector.
Vec3 apply_correction(const Vec3& a_obs, const Rotation& r_add);

struct CorrectionState {
  Rotation r_add;
  double last_angle = 0.0;
  std::vector<double> angle_history;
  std::size_t history_capacity = 64;
  bool last_anomalous = false;
};

/// Computes the instantaneous correction from (floor_normal, up_vector) and
/// blends it into the state geodesically by cfg.smoothing. An anomalous tilt
/// leaves the rotation unchanged and flags the state.
CorrectionState correction_step(const CorrectionState& state, const LocalizedFootprint& footprint,
                                const Vec3& floor_normal, const CorrectionConfig& cfg = {});

struct PlaneFit {
  Vec3 normal;     // unit, oriented so normal.z > 0
  Vec3 centroid;
  double rms_residual = 0.0;  // RMS point-plane distance, meters
};

/// Total-least-squares plane through >= 3 non-collinear points (smallest
/// principal component of the centered set). Throws DegenerateGeometryError
/// for collinear or coincident inputs.
PlaneFit estimate_floor_normal(const std::vector<Vec3>& points);

/// One streaming output row per correction step (plot-ready).
struct CorrectionRecord {
  double timestamp = 0.0;
  double uncorrected_error_m = 0.0;
  double corrected_error_m = 0.0;
  double correction_angle_rad = 0.0;
};

}  // namespace robocal
