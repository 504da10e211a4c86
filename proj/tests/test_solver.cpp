// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>

#include "robocal/random.hpp"
#include "robocal/solver.hpp"

using namespace robocal;

namespace {

// Forward oracle: B = X^-1 A X, the exact device-side transition for a
// ground-truth extrinsic.
Transition transition_from_truth(const Pose& a, const Pose& x_true) {
  return Transition{a, x_true.inverse() * a * x_true};
}

CalibrationSession session_from_motions(const std::vector<Pose>& head_motions,
                                        const Pose& x_true) {
  CalibrationSession s;
  for (const Pose& a : head_motions) {
    s.transitions.push_back(transition_from_truth(a, x_true));
  }
  return s;
}

const Pose kReferenceTruth{Rotation::identity(), Vec3(0.12, 0.12, 0.12)};

std::vector<Pose> two_way_motions() {
  return {Pose{Rotation::rot_z(0.3), Vec3::Zero()}, Pose{Rotation::rot_z(-0.3), Vec3::Zero()},
          Pose{Rotation::rot_y(0.3), Vec3::Zero()}, Pose{Rotation::rot_y(-0.3), Vec3::Zero()}};
}

// Floor observation consistent with a ground truth: the device-frame normal
// and the device height above the plane containing the foot.
FloorObservation floor_from_truth(const Pose& head_world, const Pose& x_true,
                                  const RobotKinematics& kin) {
  Pose device = head_world * x_true;
  Vec3 n_map = Vec3::UnitZ();
  Vec3 foot = head_world * kin.head_to_foot;
  double height = n_map.dot(device.translation - foot);
  Vec3 n_device = device.rotation.inverse() * n_map;
  return FloorObservation(n_device.normalized(), height);
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("solve_rotation on exact pairs") {
  // Identity from two aligned pairs.
  RotationSolve s = solve_rotation({AxisPair{Vec3(0, 0, 1), Vec3(0, 0, 1)},
                                    AxisPair{Vec3(0, 1, 0), Vec3(0, 1, 0)}});
  CHECK(s.rotation.angle() < 1e-12);
  CHECK(!s.under_constrained);
  CHECK(s.rms_residual_rad < 1e-12);

  // Quarter turn about z: verified by applying to both pairs.
  s = solve_rotation({AxisPair{Vec3(1, 0, 0), Vec3(0, -1, 0)},
                      AxisPair{Vec3(0, 1, 0), Vec3(1, 0, 0)}});
  CHECK(s.rotation.angle_to(Rotation::rot_z(kPi / 2)) < 1e-9);
  CHECK((s.rotation * Vec3(0, -1, 0) - Vec3(1, 0, 0)).norm() < 1e-9);
  CHECK((s.rotation * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-9);

  // Single pair: one free degree of freedom about the axis.
  s = solve_rotation({AxisPair{Vec3(0, 0, 1), Vec3(0, 0, 1)}});
  CHECK(s.under_constrained);
  REQUIRE(s.free_axis.has_value());
  CHECK((*s.free_axis - Vec3(0, 0, 1)).norm() < 1e-9);
  CHECK(s.rotation.angle() < 1e-12);  // minimum-norm representative

  // Parallel pairs, rotated: minimum-angle alignment.
  s = solve_rotation({AxisPair{Vec3(0, 0, 1), Vec3(1, 0, 0)},
                      AxisPair{Vec3(0, 0, 1), Vec3(1, 0, 0)}});
  CHECK(s.under_constrained);
  CHECK((s.rotation * Vec3(1, 0, 0) - Vec3(0, 0, 1)).norm() < 1e-9);
  CHECK(s.rotation.angle() == doctest::Approx(kPi / 2).epsilon(1e-9));
}

TEST_CASE("solve_rotation recovers random rotations from noiseless pairs") {
  Rng rng(41);
  for (int i = 0; i < 100; ++i) {
    Rotation r = rng.rotation();
    std::vector<AxisPair> pairs;
    int n = 2 + static_cast<int>(rng.uniform(0, 3));
    for (int k = 0; k < n; ++k) {
      Vec3 ka = rng.unit_vector();
      pairs.push_back(AxisPair{ka, r.inverse() * ka});
    }
    // Guard against accidentally parallel draws.
    if (std::abs(pairs[0].k_a.dot(pairs[1].k_a)) > 0.99) continue;
    RotationSolve s = solve_rotation(pairs);
    CHECK(s.rotation.angle_to(r) < 1e-9);
  }
}

TEST_CASE("solve_translation examples from the ground truth") {
  // Single half-turn about z: t_x, t_y determined, t_z free.
  Pose a{Rotation::rot_z(kPi), Vec3::Zero()};
  Transition tr = transition_from_truth(a, kReferenceTruth);
  CHECK((tr.b.translation - Vec3(-0.24, -0.24, 0.0)).norm() < 1e-12);

  TranslationSolve s = solve_translation(
      {TranslationRow{tr.a.rotation, tr.a.translation, tr.b.translation}},
      Rotation::identity(), {});
  CHECK(s.translation.x() == doctest::Approx(0.12).epsilon(1e-9));
  CHECK(s.translation.y() == doctest::Approx(0.12).epsilon(1e-9));
  CHECK(s.translation.z() == doctest::Approx(0.0).epsilon(1e-12));  // minimum norm
  REQUIRE(s.null_directions.size() == 1);
  CHECK(std::abs(s.null_directions[0].dot(Vec3::UnitZ())) > 1.0 - 1e-9);

  // Adding one floor row pins t_z.
  RobotKinematics kin(Vec3(0, 0, -1.1), 1.1);
  FloorObservation floor = floor_from_truth(Pose::identity(), kReferenceTruth, kin);
  CHECK(floor.height == doctest::Approx(1.22).epsilon(1e-12));
  s = solve_translation({TranslationRow{tr.a.rotation, tr.a.translation, tr.b.translation}},
                        Rotation::identity(), {FloorRow{floor, kin}});
  CHECK((s.translation - Vec3(0.12, 0.12, 0.12)).norm() < 1e-9);
  CHECK(s.null_directions.empty());

  // Rotations about two axes: exact.
  std::vector<TranslationRow> rows;
  for (const Rotation& r : {Rotation::rot_z(0.4), Rotation::rot_y(0.7)}) {
    Transition t2 = transition_from_truth(Pose{r, Vec3::Zero()}, kReferenceTruth);
    rows.push_back(TranslationRow{t2.a.rotation, t2.a.translation, t2.b.translation});
  }
  s = solve_translation(rows, Rotation::identity(), {});
  CHECK((s.translation - kReferenceTruth.translation).norm() < 1e-9);
  CHECK(s.rms_residual_m < 1e-12);
}

TEST_CASE("floor rows are satisfied by the ground truth") {
  Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    Pose x_true{rng.rotation(), rng.gaussian_vec3(0.15)};
    RobotKinematics kin(Vec3(0.02, -0.01, -1.1), 1.1);
    // Random upright-ish head pose above the floor.
    Pose head{Rotation::rot_z(rng.uniform(-kPi, kPi)),
              Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), 1.1)};
    Pose device = head * x_true;
    Vec3 n_map = Vec3::UnitZ();
    // Height of the device above the plane containing the foot: the foot is
    // at head + R_head * head_to_foot.
    Vec3 foot = head * kin.head_to_foot;
    double height = n_map.dot(device.translation - foot);
    if (height <= 0.05) continue;
    Vec3 n_device = device.rotation.inverse() * n_map;
    FloorObservation obs(n_device.normalized(), height);

    // Eq check: n . (h n - R^-1 t + b) == 0, all in the device frame with
    // b rotated through the candidate X.
    const Rotation& r = x_true.rotation;
    Vec3 b_device = r.inverse() * kin.head_to_foot;
    Vec3 o = obs.height * obs.normal - r.inverse() * x_true.translation + b_device;
    CHECK(std::abs(obs.normal.dot(o)) < 1e-9);
  }
}

TEST_CASE("calibrate recovers the truth from noiseless two-way sessions") {
  CalibrationSession session = session_from_motions(two_way_motions(), kReferenceTruth);
  CalibrationResult result = calibrate(session);
  CHECK(result.x.rotation.angle_to(kReferenceTruth.rotation) < 1e-9);
  CHECK((result.x.translation - kReferenceTruth.translation).norm() < 1e-9);
  CHECK(result.observability.all());
  CHECK(result.rotation_residual_rad < 1e-9);
  CHECK(result.translation_residual_m < 1e-9);
}

TEST_CASE("calibrate handles the horizontal + floor method") {
  // Two horizontal rotations + two forward moves + floor observations.
  std::vector<Pose> motions{
      Pose{Rotation::rot_z(0.6), Vec3::Zero()}, Pose{Rotation::rot_z(-0.6), Vec3::Zero()},
      Pose{Rotation::identity(), Vec3(0.6, 0, 0)}, Pose{Rotation::identity(), Vec3(0.6, 0, 0)}};
  Rng rng(43);
  for (int i = 0; i < 50; ++i) {
    Pose x_true{rng.rotation(), rng.gaussian_vec3(0.15)};
    CalibrationSession session = session_from_motions(motions, x_true);
    RobotKinematics kin(Vec3(0, 0, -1.1), 1.1);
    session.kinematics = kin;
    for (int f = 0; f < 5; ++f) {
      Pose head{Rotation::rot_z(rng.uniform(-1, 1)), Vec3(rng.uniform(-1, 1), 0.0, 1.1)};
      Pose device = head * x_true;
      Vec3 foot = head * kin.head_to_foot;
      double height = device.translation.z() - foot.z();
      if (height <= 0.05) continue;
      session.floor_observations.push_back(FloorObservation(
          (device.rotation.inverse() * Vec3::UnitZ()).normalized(), height));
    }
    if (session.floor_observations.empty()) continue;
    CalibrationResult result = calibrate(session);
    CHECK(result.x.rotation.angle_to(x_true.rotation) < 1e-9);
    CHECK((result.x.translation - x_true.translation).norm() < 1e-9);
    CHECK(result.observability.all());
  }
}

TEST_CASE("calibrate names the missing parameters on degenerate sessions") {
  // Horizontal rotations only: t_z and yaw unconstrained.
  std::vector<Pose> motions{Pose{Rotation::rot_z(0.3), Vec3::Zero()},
                            Pose{Rotation::rot_z(-0.3), Vec3::Zero()}};
  CalibrationSession session = session_from_motions(motions, kReferenceTruth);
  try {
    calibrate(session);
    FAIL("expected InsufficientMotionError");
  } catch (const InsufficientMotionError& e) {
    auto has = [&](const char* name) {
      return std::find(e.missing().begin(), e.missing().end(), name) != e.missing().end();
    };
    CHECK(has("t_z"));
    CHECK(has("yaw"));
    CHECK(!has("t_x"));
    CHECK(std::string(e.what()).find("t_z") != std::string::npos);
    CHECK(std::string(e.what()).find("floor") != std::string::npos);
  }

  // allow_partial returns the minimum-norm representative instead.
  SolveConfig cfg;
  cfg.allow_partial = true;
  CalibrationResult partial = calibrate(session, cfg);
  CHECK(partial.under_constrained);
  CHECK(!partial.observability.t_z);
  CHECK(partial.x.translation.x() == doctest::Approx(0.12).epsilon(1e-9));
  CHECK(partial.x.translation.z() == doctest::Approx(0.0).epsilon(1e-9));

  // Forward motion alone cannot constrain roll or any translation.
  CalibrationSession forward_only = session_from_motions(
      {Pose{Rotation::identity(), Vec3(0.6, 0, 0)}}, kReferenceTruth);
  CHECK_THROWS_AS(calibrate(forward_only), InsufficientMotionError);
}

TEST_CASE("exact recovery for random extrinsics and valid motion sets") {
  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    Pose x_true{rng.rotation(), rng.gaussian_vec3(0.2)};
    std::vector<Pose> motions = two_way_motions();
    // A couple of extra random rotational motions for variety.
    for (int k = 0; k < 2; ++k) {
      motions.push_back(Pose{Rotation::from_axis_angle(rng.unit_vector(), rng.uniform(0.1, 1.0)),
                             Vec3::Zero()});
    }
    CalibrationSession session = session_from_motions(motions, x_true);
    CalibrationResult result = calibrate(session);
    CHECK(result.x.rotation.angle_to(x_true.rotation) < 1e-9);
    CHECK((result.x.translation - x_true.translation).norm() < 1e-9);
  }
}

TEST_CASE("calibration is equivariant to world-frame changes") {
  Rng rng(45);
  Pose x_true{rng.rotation(), rng.gaussian_vec3(0.2)};
  std::vector<Pose> heads{Pose::identity(), Pose{Rotation::rot_z(0.3), Vec3::Zero()},
                          Pose{Rotation::rot_z(-0.3), Vec3(0, 0, 0)},
                          Pose{Rotation::rot_y(0.3), Vec3::Zero()},
                          Pose{Rotation::rot_y(-0.3), Vec3::Zero()}};

  auto build = [&](const Pose& w_head, const Pose& w_dev) {
    CalibrationSession s;
    for (size_t i = 1; i < heads.size(); ++i) {
      PosePairSample before{w_head * heads[i - 1], w_dev * (heads[i - 1] * x_true), 0.0};
      PosePairSample after{w_head * heads[i], w_dev * (heads[i] * x_true), 1.0};
      s.transitions.push_back(relative_transition(before, after));
    }
    return s;
  };

  CalibrationResult base = calibrate(build(Pose::identity(), Pose::identity()));
  Pose w1{rng.rotation(), rng.gaussian_vec3(3.0)};
  Pose w2{rng.rotation(), rng.gaussian_vec3(3.0)};
  CalibrationResult shifted = calibrate(build(w1, w2));
  CHECK(base.x.approx_equal(shifted.x, 1e-9, 1e-9));
  CHECK(base.x.approx_equal(x_true, 1e-9, 1e-9));
}

TEST_CASE("near-pi transitions calibrate despite the axis sign ambiguity") {
  Pose x_true{Rotation::rot_x(0.4) * Rotation::rot_z(1.0), Vec3(0.05, -0.1, 0.2)};
  std::vector<Pose> motions{Pose{Rotation::rot_z(kPi), Vec3::Zero()},
                            Pose{Rotation::rot_y(kPi), Vec3::Zero()},
                            Pose{Rotation::rot_z(0.5), Vec3::Zero()}};
  CalibrationSession session = session_from_motions(motions, x_true);
  CalibrationResult result = calibrate(session);
  CHECK(result.x.rotation.angle_to(x_true.rotation) < 1e-9);
  CHECK((result.x.translation - x_true.translation).norm() < 1e-9);
}

TEST_CASE("refine_nonlinear") {
  CalibrationSession session = session_from_motions(two_way_motions(), kReferenceTruth);
  CalibrationResult exact = calibrate(session);

  SUBCASE("exact initial stays put") {
    CalibrationResult refined = refine_nonlinear(session, exact);
    CHECK(refined.x.approx_equal(exact.x, 1e-10, 1e-10));
    REQUIRE(refined.refine.has_value());
    CHECK(refined.refine->converged);
  }

  SUBCASE("perturbed initial converges back") {
    CalibrationResult bumped = exact;
    bumped.x = exact.x * Pose{Rotation::from_axis_angle(Vec3(1, 2, 2).normalized(), 0.05),
                              Vec3(0.05, -0.03, 0.02)};
    CalibrationResult refined = refine_nonlinear(session, bumped);
    CHECK(refined.x.rotation.angle_to(kReferenceTruth.rotation) < 1e-8);
    CHECK((refined.x.translation - kReferenceTruth.translation).norm() < 1e-8);
    CHECK(refined.refine->final_objective <= refined.refine->initial_objective);
  }

  SUBCASE("never increases the objective on noisy sessions") {
    Rng rng(46);
    for (int trial = 0; trial < 20; ++trial) {
      CalibrationSession noisy = session_from_motions(two_way_motions(), kReferenceTruth);
      for (Transition& t : noisy.transitions) {
        t.b.rotation = t.b.rotation *
                       Rotation::from_axis_angle(rng.unit_vector(), rng.gaussian(0.0, 0.004));
        t.b.translation += rng.gaussian_vec3(0.002);
      }
      CalibrationResult linear = calibrate(noisy);
      double before = axxb_objective(noisy, linear.x);
      CalibrationResult refined = refine_nonlinear(noisy, linear);
      double after = axxb_objective(noisy, refined.x);
      CHECK(after <= before + 1e-15);
    }
  }
}

TEST_CASE("refine freezes structurally unconstrained directions") {
  // Horizontal-only session solved with allow_partial: t_z must stay at its
  // minimum-norm value through the refinement instead of drifting.
  std::vector<Pose> motions{Pose{Rotation::rot_z(0.5), Vec3::Zero()},
                            Pose{Rotation::rot_z(-0.5), Vec3::Zero()}};
  CalibrationSession session = session_from_motions(motions, kReferenceTruth);
  // Mild noise so the objective has nonzero gradients everywhere.
  Rng rng(47);
  for (Transition& t : session.transitions) {
    t.b.translation += rng.gaussian_vec3(0.002);
  }
  SolveConfig cfg;
  cfg.allow_partial = true;
  CalibrationResult partial = calibrate(session, cfg);
  CalibrationResult refined = refine_nonlinear(session, partial);
  CHECK(std::abs(refined.x.translation.z() - partial.x.translation.z()) < 1e-9);
}

}  // TEST_SUITE
