// SPDX-License-Identifier: Apache-2.0
//
// Calibration session building: raw pose-pair samples become A/B transitions,
// transitions get a motion class, and the session reports which of the six
// extrinsic parameters the collected motions constrain.
//
// All functions are pure; transitions may be classified in parallel.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robocal/geometry.hpp"

namespace robocal {

/// One paired observation: the robot head pose in the robot's local frame and
/// the device pose in the device's map frame, at the same instant.
struct PosePairSample {
  Pose head_pose;
  Pose device_pose;
  double timestamp = 0.0;  // seconds
};

/// The A (head) and B (device) relative motions between two samples.
struct Transition {
  Pose a;
  Pose b;
};

enum class MotionClass {
  HorizontalRotation,  // rotation about the pre-transition head z axis
  VerticalRotation,    // rotation about an axis in the head's horizontal plane
  ForwardTranslation,  // translation with negligible rotation
  Complex,             // rotation and translation mixed, or an oblique axis
  Negligible,          // below both motion thresholds
};

const char* to_string(MotionClass m);

/// Which of the six extrinsic parameters are constrained (true = constrained).
struct ParameterMask {
  bool t_x = false, t_y = false, t_z = false;
  bool roll = false, pitch = false, yaw = false;

  bool all() const { return t_x && t_y && t_z && roll && pitch && yaw; }
  bool none() const { return !(t_x || t_y || t_z || roll || pitch || yaw); }

  ParameterMask operator|(const ParameterMask& o) const {
    return ParameterMask{t_x || o.t_x, t_y || o.t_y, t_z || o.t_z,
                         roll || o.roll, pitch || o.pitch, yaw || o.yaw};
  }

  bool operator==(const ParameterMask&) const = default;

  /// Names of the unconstrained parameters, in t_x..yaw order.
  std::vector<std::string> missing_names() const;
};

/// Floor constraint observed by the device: the floor normal expressed in the
/// device frame at the sample time, and the device origin's height above the
/// floor plane. Constructor-validated: |normal| == 1 within 1e-9, height > 0.
struct FloorObservation {
  Vec3 normal = Vec3::UnitZ();
  double height = 1.0;  // meters

  FloorObservation() = default;
  FloorObservation(const Vec3& n, double h);
};

/// Robot shape information: the head-frame vector from the head origin to the
/// foot origin, and the head joint's height above the floor when upright.
struct RobotKinematics {
  Vec3 head_to_foot = Vec3(0.0, 0.0, -1.1);
  double head_height = 1.1;  // meters, > 0

  RobotKinematics() = default;
  RobotKinematics(const Vec3& b, double h);
};

struct ClassifyConfig {
  double min_angle = 0.05;                   // rad; below this a rotation is negligible
  double min_translation = 0.02;             // m
  double axis_tolerance = 0.1;               // rad, axis distance from vertical/horizontal
  double max_incidental_translation = 0.05;  // m allowed on a "pure" rotation
};

/// Builds the A/B transition between two samples:
/// a = before.head^-1 * after.head, b = before.device^-1 * after.device.
Transition relative_transition(const PosePairSample& before, const PosePairSample& after);

MotionClass classify_motion(const Transition& t, const ClassifyConfig& cfg = {});

/// Constrained-parameter set for a pure motion class. Complex motions depend
/// on the actual transition axis: this overload returns the empty mask for
/// them (nothing is guaranteed without the axis); use the transition overload.
ParameterMask constrained_parameters(MotionClass m);

/// Axis-aware mask. For Complex transitions the two named axes most
/// perpendicular to the rotation axis are marked, for both the rotation and
/// translation triples.
ParameterMask constrained_parameters(const Transition& t, MotionClass m,
                                     const ClassifyConfig& cfg = {});

struct ObservabilityReport {
  ParameterMask mask;
  /// Numerical rank of the stacked axis set feeding the rotation constraint
  /// (rotation axes plus forward-translation directions).
  int rotation_rank = 0;
  /// Numerical rank of the stacked (I - R_A) translation system.
  int translation_rank = 0;
  bool has_floor = false;
  int complex_count = 0;     // complex transitions solve fine but accumulate odometry error
  int negligible_count = 0;  // skipped transitions
};

/// Union of per-transition masks; t_z is additionally marked constrained when
/// floor observations are available. Never throws: an all-false mask is a
/// valid report.
ObservabilityReport observability_report(const std::vector<Transition>& transitions,
                                         bool has_floor_obs, const ClassifyConfig& cfg = {},
                                         double rank_tolerance = 1e-8);

/// Motion segmentation of a raw pose log: rest runs are detected from
/// per-sample head deltas, each motion run between two rests becomes one
/// transition with endpoints averaged over `endpoint_window` seconds.
struct SegmentConfig {
  // Still thresholds sit above the deceleration tail a sparse (~1 Hz) log
  // smears into the first post-motion step (up to ~0.05 rad / ~0.09 m with
  // velocity noise), and well below genuine motion steps (>= 0.24 at the
  // standard scripts). Tune for other log rates.
  double still_angle = 0.1;         // rad per sample step
  double still_translation = 0.12;  // m per sample step
  int min_still_samples = 1;
  double endpoint_window = 0.5;     // seconds
};

std::vector<Transition> segment_transitions(const std::vector<PosePairSample>& samples,
                                            const SegmentConfig& cfg = {});

}  // namespace robocal
