// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "robocal/pose_log.hpp"
#include "robocal/simulator.hpp"

using namespace robocal;

TEST_SUITE("simulator") {

TEST_CASE("step: noiseless limit advances exactly dv * dt") {
  SimConfig cfg;
  cfg.noise = NoiseConfig::none();  // gammas 0, slip G(1, 0)
  Rng rng(1);
  SimState s;
  s.velocity = Vec3(0.3, 0.0, 0.0);  // already at speed
  step(s, Vec3(0.3, 0.0, 0.0), cfg, rng);
  CHECK(s.true_base.x() == doctest::Approx(0.003).epsilon(1e-15));
  CHECK(s.odom_base.x() == doctest::Approx(0.003).epsilon(1e-15));
  CHECK(s.true_base.y() == 0.0);
  CHECK(s.true_base.z() == 0.0);
}

TEST_CASE("step: deterministic slip shortens true travel by the slip mean") {
  SimConfig cfg;
  cfg.noise = NoiseConfig::none();
  cfg.noise.slip_mean = 0.985;  // G(0.985, 0): deterministic slip
  Rng rng(1);
  SimState s;
  s.velocity = Vec3(0.3, 0.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    step(s, Vec3(0.3, 0.0, 0.0), cfg, rng);
  }
  CHECK(s.true_base.x() == doctest::Approx(0.6 * 0.985).epsilon(1e-12));
  CHECK(s.odom_base.x() == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("step: Monte-Carlo heading statistics under full noise") {
  SimConfig base;
  const int trials = 300;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(1000 + static_cast<std::uint64_t>(t));
    SimState s;
    s.velocity = Vec3(0.0, 0.0, 0.3);
    for (int i = 0; i < 200; ++i) {
      step(s, Vec3(0.0, 0.0, 0.3), base, rng);
    }
    sum += s.true_base.z();
    sumsq += s.true_base.z() * s.true_base.z();
  }
  double mean = sum / trials;
  double stddev = std::sqrt(sumsq / trials - mean * mean);
  // Expected ~ 0.6 * 0.985 with dispersion from the speed-proportional terms.
  CHECK(mean == doctest::Approx(0.591).epsilon(0.02));
  CHECK(stddev > 0.0005);
  CHECK(stddev < 0.05);
}

TEST_CASE("step: long-run distance ratio converges to the slip mean") {
  SimConfig cfg;
  Rng rng(7);
  SimState s;
  s.velocity = Vec3(0.3, 0.0, 0.0);
  double odom_before = 0.0;
  for (int i = 0; i < 5000; ++i) {
    step(s, Vec3(0.3, 0.0, 0.0), cfg, rng);
    odom_before = s.odom_base.x();
  }
  double ratio = s.true_base.x() / odom_before;
  CHECK(std::abs(ratio - cfg.noise.slip_mean) < 0.01 * cfg.noise.slip_mean);
}

TEST_CASE("observe: zero noise reproduces the exact kinematics") {
  SimConfig cfg;
  cfg.noise = NoiseConfig::none();
  cfg.floor_observations = true;
  Rng rng(1);
  SimState s;
  s.pitch = 0.1;
  s.yaw = -0.2;
  Observation obs = observe(s, cfg, rng);

  Pose expected_head = base_to_world(s.true_base) * head_in_base(s.pitch, s.yaw, cfg);
  CHECK(obs.sample.head_pose.approx_equal(expected_head, 1e-12, 1e-12));
  CHECK(obs.sample.device_pose.approx_equal(expected_head * cfg.x_true, 1e-12, 1e-12));
  REQUIRE(obs.floor.has_value());
  // Device height above the floor: head height plus the vertical offset the
  // extrinsic adds (tilted only by the joint angles here).
  Pose device = expected_head * cfg.x_true;
  CHECK(obs.floor->height == doctest::Approx(device.translation.z()).epsilon(1e-9));
  // Floor normal expressed in the device frame.
  CHECK((obs.floor->normal - device.rotation.inverse() * Vec3(0, 0, 1)).norm() < 1e-9);

  // At rest with zero joints the height is head_height plus the vertical
  // component of the extrinsic offset.
  SimState at_rest;
  Observation rest_obs = observe(at_rest, cfg, rng);
  REQUIRE(rest_obs.floor.has_value());
  CHECK(rest_obs.floor->height ==
        doctest::Approx(cfg.head_height + cfg.x_true.translation.z()).epsilon(1e-9));
}

TEST_CASE("observe: device position noise has the configured scale") {
  SimConfig cfg;
  Rng rng(2);
  SimState s;
  Pose truth = base_to_world(s.true_base) * head_in_base(0, 0, cfg) * cfg.x_true;
  const int n = 10000;
  Vec3 sum = Vec3::Zero(), sumsq = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    Observation obs = observe(s, cfg, rng);
    Vec3 d = obs.sample.device_pose.translation - truth.translation;
    sum += d;
    sumsq += d.cwiseProduct(d);
  }
  for (int axis = 0; axis < 3; ++axis) {
    double mean = sum[axis] / n;
    double stddev = std::sqrt(sumsq[axis] / n - mean * mean);
    CHECK(std::abs(stddev - cfg.noise.device_position) < 0.1 * cfg.noise.device_position);
  }
}

TEST_CASE("observe: joint noise respects its scale through the head pose") {
  SimConfig cfg;
  Rng rng(3);
  SimState s;
  const int n = 4000;
  double sumsq = 0.0;
  Pose truth = base_to_world(s.true_base) * head_in_base(0, 0, cfg);
  for (int i = 0; i < n; ++i) {
    Observation obs = observe(s, cfg, rng);
    sumsq += std::pow(obs.sample.head_pose.rotation.angle_to(truth.rotation), 2);
  }
  // Two independent joints, each sigma = 0.001.
  double rms = std::sqrt(sumsq / n);
  CHECK(rms == doctest::Approx(0.001 * std::sqrt(2.0)).epsilon(0.1));
}

TEST_CASE("run_script: determinism and the empty script") {
  SimConfig cfg;
  cfg.seed = 99;
  ScriptRun a = run_script(two_way_rotation_script(), cfg);
  ScriptRun b = run_script(two_way_rotation_script(), cfg);
  REQUIRE(a.observations.size() == b.observations.size());
  // Bit-identical streams: serialize both and compare bytes.
  std::ostringstream sa, sb;
  std::vector<PosePairSample> va, vb;
  for (const auto& o : a.observations) va.push_back(o.sample);
  for (const auto& o : b.observations) vb.push_back(o.sample);
  write_pose_log_csv(sa, va);
  write_pose_log_csv(sb, vb);
  CHECK(sa.str() == sb.str());

  cfg.seed = 100;
  ScriptRun c = run_script(two_way_rotation_script(), cfg);
  std::ostringstream sc;
  std::vector<PosePairSample> vc;
  for (const auto& o : c.observations) vc.push_back(o.sample);
  write_pose_log_csv(sc, vc);
  CHECK(sa.str() != sc.str());

  ScriptRun empty = run_script({}, cfg);
  CHECK(empty.observations.size() == 1);
  CHECK(empty.observations[0].sample.timestamp == 0.0);
}

TEST_CASE("run_script + session_from_run: noiseless end-to-end recovery") {
  SimConfig cfg;
  cfg.noise = NoiseConfig::none();
  cfg.x_true = Pose{Rotation::rot_z(0.7) * Rotation::rot_x(-0.2), Vec3(0.12, 0.12, 0.12)};

  SUBCASE("two-way rotation script") {
    ScriptRun run = run_script(two_way_rotation_script(), cfg);
    CalibrationSession session = session_from_run(run);
    REQUIRE(session.transitions.size() == 4);
    CalibrationResult result = calibrate(session);
    CHECK(result.x.rotation.angle_to(cfg.x_true.rotation) < 1e-9);
    CHECK((result.x.translation - cfg.x_true.translation).norm() < 1e-9);
  }

  SUBCASE("horizontal + floor script") {
    cfg.floor_observations = true;
    ScriptRun run = run_script(horizontal_floor_script(), cfg);
    CalibrationSession session = session_from_run(run);
    REQUIRE(session.transitions.size() == 4);
    REQUIRE(session.floor_observations.size() == 5);
    REQUIRE(session.kinematics.has_value());
    CalibrationResult result = calibrate(session);
    CHECK(result.x.rotation.angle_to(cfg.x_true.rotation) < 1e-9);
    CHECK((result.x.translation - cfg.x_true.translation).norm() < 1e-9);
  }
}

TEST_CASE("run_script: classified session matches the script") {
  SimConfig cfg;
  cfg.floor_observations = true;
  ScriptRun run = run_script(horizontal_floor_script(), cfg);
  CalibrationSession session = session_from_run(run);
  REQUIRE(session.transitions.size() == 4);
  CHECK(classify_motion(session.transitions[0]) == MotionClass::HorizontalRotation);
  CHECK(classify_motion(session.transitions[1]) == MotionClass::HorizontalRotation);
  CHECK(classify_motion(session.transitions[2]) == MotionClass::ForwardTranslation);
  CHECK(classify_motion(session.transitions[3]) == MotionClass::ForwardTranslation);
}

TEST_CASE("shake_experiment: stationary foot and zero-latency bound") {
  SimConfig cfg;
  ShakeParams shake;
  shake.encoder_latency = 0.0;
  shake.duration = 6.0;

  SUBCASE("noiseless, zero latency: both error series vanish") {
    SimConfig quiet = cfg;
    quiet.noise = NoiseConfig::none();
    std::vector<CorrectionRecord> records = shake_experiment(quiet, shake);
    for (const CorrectionRecord& r : records) {
      CHECK(r.uncorrected_error_m < 1e-9);
      CHECK(r.corrected_error_m < 1e-9);
    }
  }

  SUBCASE("with noise, zero latency: both under 2 cm") {
    std::vector<CorrectionRecord> records = shake_experiment(cfg, shake);
    double max_unc = 0.0, max_corr = 0.0;
    for (const CorrectionRecord& r : records) {
      max_unc = std::max(max_unc, r.uncorrected_error_m);
      max_corr = std::max(max_corr, r.corrected_error_m);
    }
    CHECK(max_unc < 0.02);
    CHECK(max_corr < 0.02);
  }

  SUBCASE("the true foot never moves during a scripted shake") {
    ScriptRun run = run_script({ShakeHead{0.4, 1.2, 4.0}}, cfg);
    for (const TruthSample& t : run.truth) {
      CHECK(t.foot_pose.translation.norm() == 0.0);
      CHECK(t.foot_pose.rotation.angle() == 0.0);
    }
  }
}

TEST_CASE("shake_experiment: lag oracle at 0.3 rad, 1 Hz, 0.1 s latency") {
  // Peak reported-angle error is 2 A sin(pi f L); through the 1.1 m lever the
  // uncorrected planar error peaks near 1.1 sin(of that) ~ 0.20 m.
  SimConfig cfg;
  cfg.noise = NoiseConfig::none();
  ShakeParams shake;
  shake.amplitude = 0.3;
  shake.frequency = 1.0;
  shake.encoder_latency = 0.1;
  shake.duration = 5.0;
  std::vector<CorrectionRecord> records = shake_experiment(cfg, shake);
  double max_unc = 0.0;
  for (const CorrectionRecord& r : records) {
    max_unc = std::max(max_unc, r.uncorrected_error_m);
  }
  double peak_angle = 2.0 * 0.3 * std::sin(kPi * 1.0 * 0.1);
  CHECK(max_unc == doctest::Approx(1.1 * std::sin(peak_angle)).epsilon(0.02));
  CHECK(max_unc == doctest::Approx(0.20).epsilon(0.05));
}

TEST_CASE("shake_experiment: latency separates corrected from uncorrected") {
  SimConfig cfg;
  ShakeParams shake;  // defaults: 0.4 rad, 1.2 Hz, latency 0.12 s
  std::vector<CorrectionRecord> records = shake_experiment(cfg, shake);
  double max_unc = 0.0, max_corr = 0.0;
  for (const CorrectionRecord& r : records) {
    max_unc = std::max(max_unc, r.uncorrected_error_m);
    max_corr = std::max(max_corr, r.corrected_error_m);
  }
  // Analytic lag oracle: peak angle error 2 A sin(pi f L), lever 1.1 m.
  double peak = 2.0 * shake.amplitude *
                std::sin(kPi * shake.frequency * shake.encoder_latency);
  double expected = 1.1 * std::sin(peak);
  CHECK(max_unc == doctest::Approx(expected).epsilon(0.15));
  CHECK(max_unc > 0.3);
  CHECK(max_corr < 0.1);

  // Disabled correction copies the uncorrected column.
  std::vector<CorrectionRecord> off = shake_experiment(cfg, shake, {}, false);
  for (const CorrectionRecord& r : off) {
    CHECK(r.corrected_error_m == r.uncorrected_error_m);
    CHECK(r.correction_angle_rad == 0.0);
  }
}

TEST_CASE("robot kinematics of the simulated model") {
  SimConfig cfg;
  RobotKinematics kin = robot_kinematics(cfg);
  CHECK((kin.head_to_foot - Vec3(0, 0, -1.1)).norm() < 1e-12);
  CHECK(kin.head_height == doctest::Approx(1.1));
  // Pitched head: the head->foot vector rotates in the head frame but keeps
  // its length.
  Pose chain = head_to_foot_chain(0.3, 0.1, cfg);
  CHECK(chain.translation.norm() == doctest::Approx(1.1).epsilon(1e-12));
}

}  // TEST_SUITE
