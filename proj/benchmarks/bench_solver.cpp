// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "robocal/random.hpp"
#include "robocal/solver.hpp"

using namespace robocal;

namespace {

CalibrationSession noisy_session(int transitions, std::uint64_t seed) {
  Rng rng(seed);
  Pose x_true{Rotation::rot_z(0.5), Vec3(0.12, 0.12, 0.12)};
  CalibrationSession s;
  for (int i = 0; i < transitions; ++i) {
    Rotation axis_rot = (i % 2 == 0) ? Rotation::rot_z(0.3) : Rotation::rot_y(0.3);
    Pose a{axis_rot, Vec3::Zero()};
    Transition t{a, x_true.inverse() * a * x_true};
    t.b.translation += rng.gaussian_vec3(0.002);
    t.b.rotation = t.b.rotation * Rotation::from_axis_angle(rng.unit_vector(),
                                                            rng.gaussian(0.0, 0.004));
    s.transitions.push_back(t);
  }
  return s;
}

void BM_SolveRotation(benchmark::State& state) {
  CalibrationSession s = noisy_session(static_cast<int>(state.range(0)), 10);
  std::vector<AxisPair> pairs = extract_axis_pairs(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_rotation(pairs));
  }
}
BENCHMARK(BM_SolveRotation)->Arg(4)->Arg(16)->Arg(64);

void BM_Calibrate(benchmark::State& state) {
  CalibrationSession s = noisy_session(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(s));
  }
}
BENCHMARK(BM_Calibrate)->Arg(4)->Arg(16)->Arg(64);

void BM_RefineNonlinear(benchmark::State& state) {
  CalibrationSession s = noisy_session(static_cast<int>(state.range(0)), 12);
  CalibrationResult linear = calibrate(s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(refine_nonlinear(s, linear));
  }
}
BENCHMARK(BM_RefineNonlinear)->Arg(4)->Arg(16);

}  // namespace
