// SPDX-License-Identifier: Apache-2.0
#include "robocal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robocal {

Pose base_to_world(const Vec3& base) {
  return Pose{Rotation::rot_z(base.z()), Vec3(base.x(), base.y(), 0.0)};
}

Pose head_in_base(double pitch, double yaw, const SimConfig& cfg) {
  return Pose{Rotation::rot_z(yaw) * Rotation::rot_y(pitch), Vec3(0.0, 0.0, cfg.head_height)};
}

Pose head_to_foot_chain(double pitch, double yaw, const SimConfig& cfg) {
  return head_in_base(pitch, yaw, cfg).inverse();
}

RobotKinematics robot_kinematics(const SimConfig& cfg) {
  return RobotKinematics(head_to_foot_chain(0.0, 0.0, cfg).translation, cfg.head_height);
}

namespace {

void integrate_planar(Vec3& base, const Vec3& body_delta) {
  double heading = base.z();
  base.x() += std::cos(heading) * body_delta.x() - std::sin(heading) * body_delta.y();
  base.y() += std::sin(heading) * body_delta.x() + std::cos(heading) * body_delta.y();
  base.z() += body_delta.z();
}

Rotation small_random_rotation(Rng& rng, double angle_sigma) {
  if (angle_sigma == 0.0) return Rotation::identity();
  Vec3 axis = rng.unit_vector();
  return Rotation::from_axis_angle(axis, rng.gaussian(0.0, angle_sigma));
}

}  // namespace

void step(SimState& state, const Vec3& commanded_velocity, const SimConfig& cfg, Rng& rng) {
  Vec3 odom_delta = Vec3::Zero();
  Vec3 true_delta = Vec3::Zero();
  for (int c = 0; c < 3; ++c) {
    double limit = (c == 2) ? cfg.accel_limit_angular : cfg.accel_limit_linear;
    double accel = (commanded_velocity[c] - state.velocity[c]) / cfg.dt;
    accel = std::clamp(accel, -limit, limit);
    double speed_mag = std::abs(state.velocity[c]);
    double dv = state.velocity[c] + accel * cfg.dt +
                rng.gaussian(0.0, cfg.noise.gamma1 * speed_mag) +
                rng.gaussian(0.0, cfg.noise.gamma2 * speed_mag);
    double slip = rng.gaussian(cfg.noise.slip_mean, cfg.noise.slip_dev);
    odom_delta[c] = dv * cfg.dt;          // what the robot believes it moved
    true_delta[c] = dv * slip * cfg.dt;   // what it actually moved
    state.velocity[c] = dv;
  }
  integrate_planar(state.odom_base, odom_delta);
  integrate_planar(state.true_base, true_delta);
  state.time += cfg.dt;
}

Observation observe(const SimState& state, const SimConfig& cfg, Rng& rng) {
  const NoiseConfig& noise = cfg.noise;

  Pose true_head = base_to_world(state.true_base) * head_in_base(state.pitch, state.yaw, cfg);
  Pose reported_head =
      base_to_world(state.odom_base) *
      head_in_base(state.pitch + rng.gaussian(0.0, noise.joint_angle),
                   state.yaw + rng.gaussian(0.0, noise.joint_angle), cfg);

  Pose true_device = true_head * cfg.x_true;
  Pose observed_device{true_device.rotation * small_random_rotation(rng, noise.device_orientation),
                       true_device.translation + rng.gaussian_vec3(noise.device_position)};

  Observation obs;
  obs.sample = PosePairSample{reported_head, observed_device, state.time};

  if (cfg.floor_observations) {
    // Points on the floor plane around the perpendicular foot point of the
    // device, each perturbed per axis.
    Vec3 center(true_device.translation.x(), true_device.translation.y(), 0.0);
    obs.floor_points.reserve(static_cast<size_t>(cfg.floor_patch_points));
    for (int i = 0; i < cfg.floor_patch_points; ++i) {
      double radius = cfg.floor_patch_radius * std::sqrt(rng.uniform());
      double phi = 2.0 * kPi * rng.uniform();
      Vec3 p = center + Vec3(radius * std::cos(phi), radius * std::sin(phi), 0.0);
      obs.floor_points.push_back(p + rng.gaussian_vec3(noise.floor_point));
    }
    PlaneFit fit = estimate_floor_normal(obs.floor_points);
    double height = fit.normal.dot(observed_device.translation - fit.centroid);
    if (height > 0.0) {
      Vec3 n_device = (observed_device.rotation.inverse() * fit.normal).normalized();
      obs.floor = FloorObservation(n_device, height);
    }
  }
  return obs;
}

namespace {

struct CommandPlan {
  Vec3 velocity = Vec3::Zero();
  double duration = 0.0;
  bool is_motion = false;
  // Joint trajectory over the command, evaluated at local time.
  double pitch_from = 0.0, pitch_to = 0.0;
  double yaw_from = 0.0, yaw_to = 0.0;
  bool joints_move = false;
  bool shake = false;
  double shake_amplitude = 0.0, shake_frequency = 0.0;
};

double cosine_ramp(double from, double to, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return from + (to - from) * 0.5 * (1.0 - std::cos(kPi * tau));
}

}  // namespace

ScriptRun run_script(const MotionScript& script, const SimConfig& cfg) {
  ScriptRun run;
  run.config = cfg;
  Rng rng(cfg.seed);
  SimState state;

  long step_index = 0;
  auto emit = [&]() {
    run.observations.push_back(observe(state, cfg, rng));
    TruthSample truth;
    truth.timestamp = state.time;
    truth.head_pose = base_to_world(state.true_base) * head_in_base(state.pitch, state.yaw, cfg);
    truth.device_pose = truth.head_pose * cfg.x_true;
    truth.foot_pose = base_to_world(state.true_base);
    run.truth.push_back(truth);
  };

  emit();  // initial state, also the whole output for an empty script

  for (std::size_t ci = 0; ci < script.size(); ++ci) {
    CommandPlan plan;
    plan.pitch_from = plan.pitch_to = state.pitch;
    plan.yaw_from = plan.yaw_to = state.yaw;
    std::visit(
        [&](const auto& cmd) {
          using T = std::decay_t<decltype(cmd)>;
          if constexpr (std::is_same_v<T, RotateInPlace>) {
            plan.velocity = Vec3(0.0, 0.0, cmd.rate);
            plan.duration = cmd.duration;
            plan.is_motion = true;
          } else if constexpr (std::is_same_v<T, Forward>) {
            plan.velocity = Vec3(cmd.speed, 0.0, 0.0);
            plan.duration = cmd.duration;
            plan.is_motion = true;
          } else if constexpr (std::is_same_v<T, HeadMove>) {
            plan.duration = cmd.duration;
            plan.is_motion = true;
            plan.joints_move = true;
            plan.pitch_to = state.pitch + cmd.pitch_delta;
            plan.yaw_to = state.yaw + cmd.yaw_delta;
          } else if constexpr (std::is_same_v<T, ShakeHead>) {
            plan.duration = cmd.duration;
            plan.is_motion = true;
            plan.shake = true;
            plan.shake_amplitude = cmd.amplitude;
            plan.shake_frequency = cmd.frequency;
          } else if constexpr (std::is_same_v<T, Hold>) {
            plan.duration = cmd.duration;
          }
        },
        script[ci]);

    Segment segment;
    segment.command_index = ci;
    segment.is_motion = plan.is_motion;
    segment.start_time = state.time;

    long nsteps = std::lround(plan.duration / cfg.dt);
    for (long k = 0; k < nsteps; ++k) {
      step(state, plan.velocity, cfg, rng);
      // Joints follow the commanded trajectory exactly; evaluate at the
      // post-step time so joint and base states stay consistent.
      double local = static_cast<double>(k + 1) * cfg.dt;
      if (plan.joints_move) {
        double tau = (plan.duration > 0.0) ? local / plan.duration : 1.0;
        state.pitch = cosine_ramp(plan.pitch_from, plan.pitch_to, tau);
        state.yaw = cosine_ramp(plan.yaw_from, plan.yaw_to, tau);
      } else if (plan.shake) {
        state.pitch = plan.pitch_from +
                      plan.shake_amplitude * std::sin(2.0 * kPi * plan.shake_frequency * local);
      }
      ++step_index;
      if (step_index % cfg.observe_every == 0) emit();
    }
    segment.end_time = state.time;
    run.segments.push_back(segment);
  }

  // Make sure the final settled state is observed.
  if (step_index % cfg.observe_every != 0 || run.observations.size() == 1) {
    if (!script.empty()) emit();
  }
  return run;
}

namespace {

PosePairSample window_average(const ScriptRun& run, double from, double to) {
  std::vector<Pose> heads, devices;
  double stamp = to;
  for (const Observation& o : run.observations) {
    if (o.sample.timestamp >= from - 1e-9 && o.sample.timestamp <= to + 1e-9) {
      heads.push_back(o.sample.head_pose);
      devices.push_back(o.sample.device_pose);
    }
  }
  if (heads.empty()) {
    // Fall back to the observation nearest the window.
    double best = std::numeric_limits<double>::infinity();
    const Observation* pick = nullptr;
    for (const Observation& o : run.observations) {
      double d = std::min(std::abs(o.sample.timestamp - from), std::abs(o.sample.timestamp - to));
      if (d < best) {
        best = d;
        pick = &o;
      }
    }
    return pick->sample;
  }
  return PosePairSample{average_poses(heads), average_poses(devices), stamp};
}

}  // namespace

CalibrationSession session_from_run(const ScriptRun& run, const SessionBuildConfig& cfg) {
  CalibrationSession session;
  const auto& segs = run.segments;

  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (!segs[i].is_motion) continue;

    // Settled pre sample: the trailing window of the preceding rest.
    double pre_from = segs[i].start_time - cfg.hold_window;
    double pre_to = segs[i].start_time;
    if (i > 0 && !segs[i - 1].is_motion) {
      pre_from = std::max(pre_from, segs[i - 1].start_time);
    }
    // Settled post sample: the trailing window of the following rest, so the
    // base has fully decelerated.
    double post_from = segs[i].end_time;
    double post_to = segs[i].end_time;
    if (i + 1 < segs.size() && !segs[i + 1].is_motion) {
      post_to = segs[i + 1].end_time;
      post_from = std::max(post_to - cfg.hold_window, segs[i].end_time);
    }

    PosePairSample before = window_average(run, pre_from, pre_to);
    PosePairSample after = window_average(run, post_from, post_to);
    session.transitions.push_back(relative_transition(before, after));
  }

  if (run.config.floor_observations) {
    session.kinematics = robot_kinematics(run.config);
    // One aggregated floor observation per rest segment, from the settled
    // trailing window.
    for (const Segment& seg : segs) {
      if (seg.is_motion) continue;
      double from = std::max(seg.start_time, seg.end_time - cfg.hold_window);
      double to = seg.end_time;
      std::vector<Vec3> points;
      std::vector<Pose> devices;
      for (const Observation& o : run.observations) {
        if (o.sample.timestamp >= from - 1e-9 && o.sample.timestamp <= to + 1e-9 &&
            !o.floor_points.empty()) {
          points.insert(points.end(), o.floor_points.begin(), o.floor_points.end());
          devices.push_back(o.sample.device_pose);
        }
      }
      if (points.size() < 3 || devices.empty()) continue;
      PlaneFit fit = estimate_floor_normal(points);
      Pose device = average_poses(devices);
      double height = fit.normal.dot(device.translation - fit.centroid);
      if (height <= 0.0) continue;
      Vec3 n_device = (device.rotation.inverse() * fit.normal).normalized();
      session.floor_observations.push_back(FloorObservation(n_device, height));
    }
  }
  return session;
}

MotionScript two_way_rotation_script() {
  return MotionScript{
      Hold{1.0},
      HeadMove{0.0, 0.3, 1.0},  Hold{1.0},
      HeadMove{0.0, -0.3, 1.0}, Hold{1.0},
      HeadMove{0.3, 0.0, 1.0},  Hold{1.0},
      HeadMove{-0.3, 0.0, 1.0}, Hold{1.0},
  };
}

MotionScript horizontal_floor_script() {
  return MotionScript{
      Hold{1.0},
      RotateInPlace{0.3, 2.0},  Hold{1.0},
      RotateInPlace{-0.3, 2.0}, Hold{1.0},
      Forward{0.3, 2.0},        Hold{1.0},
      Forward{0.3, 2.0},        Hold{1.0},
  };
}

std::vector<CorrectionRecord> shake_experiment(const SimConfig& cfg, const ShakeParams& shake,
                                               const CorrectionConfig& correction,
                                               bool apply_online_correction) {
  Rng rng(cfg.seed);

  // Floor normal from a one-time scan of the device's map, not per-step
  // refits: the environmental map is static.
  std::vector<Vec3> prescan;
  prescan.reserve(static_cast<size_t>(shake.prescan_points));
  for (int i = 0; i < shake.prescan_points; ++i) {
    double radius = shake.prescan_radius * std::sqrt(rng.uniform());
    double phi = 2.0 * kPi * rng.uniform();
    Vec3 p(radius * std::cos(phi), radius * std::sin(phi), 0.0);
    prescan.push_back(p + rng.gaussian_vec3(cfg.noise.floor_point));
  }
  Vec3 floor_normal = estimate_floor_normal(prescan).normal;

  auto true_pitch = [&](double t) {
    return shake.amplitude * std::sin(2.0 * kPi * shake.frequency * t);
  };
  auto reported_pitch = [&](double t) {
    return t >= shake.encoder_latency ? true_pitch(t - shake.encoder_latency) : 0.0;
  };

  std::vector<CorrectionRecord> records;
  CorrectionState state;
  long nsteps = std::lround(shake.duration / cfg.dt);
  records.reserve(static_cast<size_t>(nsteps) + 1);

  for (long k = 0; k <= nsteps; ++k) {
    double t = static_cast<double>(k) * cfg.dt;
    double pitch = true_pitch(t);

    // The base is pinned: the true foot pose never moves.
    Pose true_head = head_in_base(pitch, 0.0, cfg);
    Pose true_device = true_head * cfg.x_true;
    Pose observed_device{
        true_device.rotation * small_random_rotation(rng, cfg.noise.device_orientation),
        true_device.translation + rng.gaussian_vec3(cfg.noise.device_position)};

    double rep_pitch = reported_pitch(t) + rng.gaussian(0.0, cfg.noise.joint_angle);
    double rep_yaw = rng.gaussian(0.0, cfg.noise.joint_angle);
    Pose chain = head_to_foot_chain(rep_pitch, rep_yaw, cfg);

    LocalizedFootprint footprint = localize_footprint(observed_device, cfg.x_true, chain);

    CorrectionRecord rec;
    rec.timestamp = t;
    rec.uncorrected_error_m = footprint.foot_pose.translation.head<2>().norm();

    if (apply_online_correction) {
      state = correction_step(state, footprint, floor_normal, correction);
      Vec3 device_to_foot = footprint.foot_pose.translation - observed_device.translation;
      Vec3 corrected = observed_device.translation + apply_correction(device_to_foot, state.r_add);
      rec.corrected_error_m = corrected.head<2>().norm();
      rec.correction_angle_rad = state.last_angle;
    } else {
      rec.corrected_error_m = rec.uncorrected_error_m;
      rec.correction_angle_rad = 0.0;
    }
    records.push_back(rec);
  }
  return records;
}

}  // namespace robocal
