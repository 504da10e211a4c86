// SPDX-License-Identifier: Apache-2.0
//
// Deterministic, seedable simulation of a two-joint-head mobile robot
// carrying a self-localizing device. Physics runs at cfg.dt (default 100 Hz):
// per channel, the observed velocity integrates commanded acceleration plus
// two speed-proportional Gaussian disturbances, and the true displacement is
// the observed velocity times a Gaussian slip factor. The robot's reported
// poses integrate the observed velocities; the hidden true poses integrate
// the slipped displacements. Device poses track the true head pose through
// x_true plus direct Gaussian observation noise.
//
// A run is single-threaded; identical config + seed gives bit-identical
// streams. Monte-Carlo trials use derived seeds (base + trial index).
#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "robocal/online.hpp"
#include "robocal/random.hpp"
#include "robocal/solver.hpp"

namespace robocal {

/// Gaussian noise magnitudes and slip parameters of the simulation.
struct NoiseConfig {
  double joint_angle = 0.001;         // rad, per joint per observation
  double device_position = 0.002;     // m, per axis
  double device_orientation = 0.004;  // rad, random-axis angle
  double floor_point = 0.02;          // m, per axis
  double gamma1 = 0.04;               // speed-proportional velocity noise
  double gamma2 = 0.04;
  double slip_mean = 0.985;           // a: displacement = velocity * G(a, b) * dt
  double slip_dev = 0.01;             // b

  static NoiseConfig none() {
    NoiseConfig n;
    n.joint_angle = n.device_position = n.device_orientation = n.floor_point = 0.0;
    n.gamma1 = n.gamma2 = 0.0;
    n.slip_mean = 1.0;
    n.slip_dev = 0.0;
    return n;
  }
};

struct SimConfig {
  double dt = 0.01;         // physics step, seconds
  int observe_every = 100;  // emit one observation every N steps
  double head_height = 1.1;
  Pose x_true = Pose{Rotation::identity(), Vec3(0.12, 0.12, 0.12)};
  NoiseConfig noise{};
  double accel_limit_linear = 1.0;   // m/s^2 toward the commanded velocity
  double accel_limit_angular = 1.0;  // rad/s^2
  bool floor_observations = false;
  int floor_patch_points = 24;       // sampled points per floor observation
  double floor_patch_radius = 0.6;   // m around the device's floor foot point
  std::uint64_t seed = 1;
};

/// Planar base state plus head joints. velocity is the robot's *observed*
/// dv = (dx, dy, dtheta); true_base and odom_base diverge through slip.
struct SimState {
  double time = 0.0;
  Vec3 true_base = Vec3::Zero();  // x, y, heading
  Vec3 odom_base = Vec3::Zero();
  double pitch = 0.0;             // head joints, rad
  double yaw = 0.0;
  Vec3 velocity = Vec3::Zero();
};

struct RotateInPlace {
  double rate;      // rad/s
  double duration;  // s
};
struct Forward {
  double speed;     // m/s
  double duration;  // s
};
struct HeadMove {
  double pitch_delta;  // rad
  double yaw_delta;    // rad
  double duration = 1.0;
};
struct ShakeHead {
  double amplitude;  // rad
  double frequency;  // Hz
  double duration;   // s
};
struct Hold {
  double duration;  // s
};
using MotionCommand = std::variant<RotateInPlace, Forward, HeadMove, ShakeHead, Hold>;
using MotionScript = std::vector<MotionCommand>;

struct Observation {
  PosePairSample sample;
  std::optional<FloorObservation> floor;
  std::vector<Vec3> floor_points;  // raw noisy patch, map frame
};

struct TruthSample {
  double timestamp = 0.0;
  Pose head_pose;
  Pose device_pose;
  Pose foot_pose;
};

struct Segment {
  std::size_t command_index = 0;
  bool is_motion = false;  // Hold segments are rest
  double start_time = 0.0;
  double end_time = 0.0;
};

struct ScriptRun {
  std::vector<Observation> observations;
  std::vector<TruthSample> truth;  // at the same times as observations
  std::vector<Segment> segments;
  SimConfig config;
};

/// One physics step with body-frame commanded velocities (dx, dy, dtheta).
void step(SimState& state, const Vec3& commanded_velocity, const SimConfig& cfg, Rng& rng);

/// One noisy observation of the current state.
Observation observe(const SimState& state, const SimConfig& cfg, Rng& rng);

/// Executes the script at cfg.dt, emitting observations every
/// cfg.observe_every steps (the initial state is always observed).
ScriptRun run_script(const MotionScript& script, const SimConfig& cfg);

/// Turns a script run into a calibration session: motion segments become
/// transitions with endpoints averaged over the trailing hold_window of the
/// bracketing holds; each hold contributes one aggregated floor observation
/// when the run carries floor data. Assumes head joints are not moved while
/// floor observations are collected (true for the built-in scripts).
struct SessionBuildConfig {
  double hold_window = 0.5;  // s
  ClassifyConfig classify{};
};
CalibrationSession session_from_run(const ScriptRun& run, const SessionBuildConfig& cfg = {});

/// Head->foot vector and head height of the simulated robot at zero joints.
RobotKinematics robot_kinematics(const SimConfig& cfg);

/// Forward kinematics helpers (map/world frame).
Pose base_to_world(const Vec3& base);                                  // (x, y, heading)
Pose head_in_base(double pitch, double yaw, const SimConfig& cfg);     // joint chain
Pose head_to_foot_chain(double pitch, double yaw, const SimConfig& cfg);

/// Two horizontal (yaw) then two vertical (pitch) neck moves of 0.3 rad,
/// bracketed by holds.
MotionScript two_way_rotation_script();

/// Two on-the-spot rotations (2 s at 0.3 rad/s) and two forward moves
/// (2 s at 0.3 m/s) with five holds for floor observations.
MotionScript horizontal_floor_script();

/// Head-shake experiment: the base is pinned, the head pitch follows a
/// sinusoid, and the reported joint angles lag the true ones by
/// encoder_latency (pure transport delay). Records per physics step the
/// planar footprint error with and without the online correction; the floor
/// normal comes from a plane fit over a pre-scanned noisy patch.
struct ShakeParams {
  double amplitude = 0.4;        // rad
  double frequency = 1.2;        // Hz
  double duration = 10.0;        // s
  double encoder_latency = 0.12; // s
  int prescan_points = 1500;
  double prescan_radius = 1.5;   // m
};

std::vector<CorrectionRecord> shake_experiment(const SimConfig& cfg, const ShakeParams& shake,
                                               const CorrectionConfig& correction = {},
                                               bool apply_online_correction = true);

}  // namespace robocal
