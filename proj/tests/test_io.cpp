// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "robocal/pose_log.hpp"
#include "robocal/random.hpp"
#include "robocal/result_io.hpp"
#include "robocal/scenario.hpp"

using namespace robocal;

namespace {

std::vector<PosePairSample> random_samples(int n, Rng& rng) {
  std::vector<PosePairSample> out;
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    out.push_back(PosePairSample{Pose{rng.rotation(), rng.gaussian_vec3(2.0)},
                                 Pose{rng.rotation(), rng.gaussian_vec3(2.0)}, t});
    t += rng.uniform(0.0, 0.5);
  }
  return out;
}

bool samples_equal(const std::vector<PosePairSample>& a, const std::vector<PosePairSample>& b,
                   double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].timestamp - b[i].timestamp) > tol) return false;
    if (!a[i].head_pose.approx_equal(b[i].head_pose, tol, tol)) return false;
    if (!a[i].device_pose.approx_equal(b[i].device_pose, tol, tol)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("pose log round trip, CSV and JSON-lines") {
  Rng rng(61);
  std::vector<PosePairSample> samples = random_samples(30, rng);

  std::ostringstream csv;
  write_pose_log_csv(csv, samples);
  std::istringstream csv_in(csv.str());
  CHECK(samples_equal(read_pose_log(csv_in), samples, 1e-9));

  std::ostringstream jsonl;
  write_pose_log_jsonl(jsonl, samples);
  std::istringstream jsonl_in(jsonl.str());
  CHECK(samples_equal(read_pose_log(jsonl_in), samples, 1e-9));
}

TEST_CASE("pose log accepts comments, blank lines and a header") {
  std::string text =
      "# a comment\n"
      "timestamp,head_tx,head_ty,head_tz,head_qw,head_qx,head_qy,head_qz,"
      "dev_tx,dev_ty,dev_tz,dev_qw,dev_qx,dev_qy,dev_qz\n"
      "\n"
      "0.5,1,2,3,1,0,0,0,0,0,0,1,0,0,0\n"
      "{\"t\": 1.0, \"head\": {\"t\": [0,0,0], \"q\": [1,0,0,0]},"
      " \"device\": {\"t\": [1,1,1], \"q\": [1,0,0,0]}}\n";
  std::istringstream in(text);
  std::vector<PosePairSample> samples = read_pose_log(in);
  REQUIRE(samples.size() == 2);
  CHECK(samples[0].timestamp == 0.5);
  CHECK((samples[0].head_pose.translation - Vec3(1, 2, 3)).norm() < 1e-12);
  CHECK((samples[1].device_pose.translation - Vec3(1, 1, 1)).norm() < 1e-12);
}

TEST_CASE("pose log parse errors name the line") {
  // Line 17 carries a malformed field.
  std::ostringstream text;
  for (int i = 0; i < 16; ++i) {
    text << i << ",0,0,0,1,0,0,0,0,0,0,1,0,0,0\n";
  }
  text << "16,0,0,oops,1,0,0,0,0,0,0,1,0,0,0\n";
  std::istringstream in(text.str());
  try {
    read_pose_log(in, "poses.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 17);
    CHECK(std::string(e.what()).find("poses.csv:17") != std::string::npos);
  }

  // Wrong field count.
  std::istringstream short_line("0,1,2\n");
  CHECK_THROWS_AS(read_pose_log(short_line), ParseError);

  // Non-unit quaternion.
  std::istringstream bad_quat("0,0,0,0,2,0,0,0,0,0,0,1,0,0,0\n");
  CHECK_THROWS_AS(read_pose_log(bad_quat), ParseError);

  // Decreasing timestamps.
  std::istringstream backwards(
      "1,0,0,0,1,0,0,0,0,0,0,1,0,0,0\n"
      "0.5,0,0,0,1,0,0,0,0,0,0,1,0,0,0\n");
  CHECK_THROWS_AS(read_pose_log(backwards), ParseError);
}

TEST_CASE("floor CSV round trip and validation") {
  std::vector<FloorObservation> obs{FloorObservation(Vec3(0, 0, 1), 1.22),
                                    FloorObservation(Vec3(0.1, 0, 1).normalized(), 0.9)};
  std::ostringstream out;
  write_floor_csv(out, obs);
  std::istringstream in(out.str());
  std::vector<FloorObservation> back = read_floor_csv(in);
  REQUIRE(back.size() == 2);
  CHECK((back[0].normal - obs[0].normal).norm() < 1e-9);
  CHECK(back[1].height == doctest::Approx(0.9));

  std::istringstream bad("0,0,2,1.0\n");
  CHECK_THROWS_AS(read_floor_csv(bad), ParseError);
  std::istringstream negative("0,0,1,-1.0\n");
  CHECK_THROWS_AS(read_floor_csv(negative), ParseError);
}

TEST_CASE("calibration result JSON round trip") {
  CalibrationResult r;
  r.x = Pose{Rotation::rot_z(0.7) * Rotation::rot_x(0.1), Vec3(0.12, 0.11, 0.13)};
  r.rotation_residual_rad = 1.5e-3;
  r.translation_residual_m = 2.5e-3;
  r.observability = ParameterMask{true, true, true, true, true, true};
  r.report.mask = r.observability;
  r.report.rotation_rank = 2;
  r.report.translation_rank = 3;
  r.report.has_floor = true;
  r.translation_condition = 3.7;
  RefineInfo info;
  info.iterations = 6;
  info.converged = true;
  info.initial_objective = 1e-4;
  info.final_objective = 2e-5;
  r.refine = info;

  std::string text = result_to_json(r);
  CHECK(text.find("rotation_axis") != std::string::npos);
  CHECK(text.find("translation_m") != std::string::npos);
  CalibrationResult back = result_from_json(text);
  CHECK(back.x.approx_equal(r.x, 1e-9, 1e-9));
  CHECK(back.rotation_residual_rad == doctest::Approx(r.rotation_residual_rad));
  CHECK(back.observability == r.observability);
  CHECK(back.report.translation_rank == 3);
  REQUIRE(back.refine.has_value());
  CHECK(back.refine->iterations == 6);
}

TEST_CASE("scenario parsing: defaults mirror the standard noise table") {
  Scenario s = parse_scenario_json(R"({"seed": 7, "script": [{"cmd": "hold"}]})");
  CHECK(s.sim.seed == 7);
  CHECK(s.sim.dt == doctest::Approx(0.01));
  CHECK(s.sim.noise.joint_angle == doctest::Approx(0.001));
  CHECK(s.sim.noise.device_position == doctest::Approx(0.002));
  CHECK(s.sim.noise.device_orientation == doctest::Approx(0.004));
  CHECK(s.sim.noise.floor_point == doctest::Approx(0.02));
  CHECK(s.sim.noise.gamma1 == doctest::Approx(0.04));
  CHECK(s.sim.noise.gamma2 == doctest::Approx(0.04));
  CHECK(s.sim.noise.slip_mean == doctest::Approx(0.985));
  CHECK(s.sim.noise.slip_dev == doctest::Approx(0.01));
  CHECK(s.sim.head_height == doctest::Approx(1.1));
  CHECK((s.sim.x_true.translation - Vec3(0.12, 0.12, 0.12)).norm() < 1e-12);
  CHECK(s.sim.x_true.rotation.angle() == 0.0);
}

TEST_CASE("scenario parsing: overrides, round trip and errors") {
  std::string text = R"({
    "name": "custom",
    "seed": 11,
    "obs_every": 20,
    "noise": {"a": 0.97, "b": 0.02, "gamma1": 0.0},
    "x_true": {"translation": [0.1, 0.0, -0.05], "quat_wxyz": [1, 0, 0, 0]},
    "floor": {"enabled": true, "patch_points": 12},
    "script": [
      {"cmd": "rotate", "rate": 0.3, "duration": 2.0},
      {"cmd": "hold", "duration": 1.0},
      {"cmd": "forward", "speed": 0.3, "duration": 2.0},
      {"cmd": "head_move", "pitch": 0.3, "yaw": 0.0},
      {"cmd": "shake_head", "amplitude": 0.2, "frequency": 1.0, "duration": 3.0}
    ],
    "shake": {"latency": 0.05},
    "correction": {"smoothing": 0.5}
  })";
  Scenario s = parse_scenario_json(text);
  CHECK(s.sim.noise.slip_mean == doctest::Approx(0.97));
  CHECK(s.sim.noise.gamma1 == 0.0);
  CHECK(s.sim.noise.gamma2 == doctest::Approx(0.04));  // untouched default
  CHECK(s.sim.floor_observations);
  CHECK(s.sim.floor_patch_points == 12);
  REQUIRE(s.script.size() == 5);
  CHECK(std::holds_alternative<RotateInPlace>(s.script[0]));
  CHECK(std::holds_alternative<ShakeHead>(s.script[4]));
  CHECK(s.shake.encoder_latency == doctest::Approx(0.05));
  CHECK(s.correction.smoothing == doctest::Approx(0.5));

  // Round trip through the serializer.
  Scenario back = parse_scenario_json(scenario_to_json(s));
  CHECK(back.sim.noise.slip_mean == doctest::Approx(0.97));
  CHECK(back.script.size() == 5);
  CHECK(back.sim.x_true.approx_equal(s.sim.x_true, 1e-12, 1e-12));

  CHECK_THROWS_AS(parse_scenario_json("not json"), ParseError);
  CHECK_THROWS_AS(parse_scenario_json(R"({"unknown_key": 1})"), ParseError);
  CHECK_THROWS_AS(parse_scenario_json(R"({"noise": {"sigma": 1}})"), ParseError);
  CHECK_THROWS_AS(parse_scenario_json(R"({"script": [{"cmd": "fly"}]})"), ParseError);
  CHECK_THROWS_AS(parse_scenario_json(R"({"dt": -0.01})"), ParseError);
}

TEST_CASE("built-in scenarios") {
  for (const std::string& name : builtin_scenario_names()) {
    Scenario s = builtin_scenario(name);
    CHECK(s.name == name);
    // Every built-in serializes and parses back.
    Scenario back = parse_scenario_json(scenario_to_json(s));
    CHECK(back.script.size() == s.script.size());
  }
  CHECK(builtin_scenario("two-way-rotation-noiseless").sim.noise.gamma1 == 0.0);
  CHECK(builtin_scenario("horizontal-floor").sim.floor_observations);
  CHECK(builtin_scenario("shake-zero-latency").shake.encoder_latency == 0.0);
  CHECK_THROWS_AS(builtin_scenario("nope"), Error);
  CHECK_THROWS_AS(load_scenario("/definitely/not/a/file.json"), Error);
}

}  // TEST_SUITE
