// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "robocal/geometry.hpp"
#include "robocal/random.hpp"

using namespace robocal;

namespace {

void BM_PoseCompose(benchmark::State& state) {
  Rng rng(1);
  Pose a{rng.rotation(), rng.gaussian_vec3(1.0)};
  Pose b{rng.rotation(), rng.gaussian_vec3(1.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(a * b);
  }
}
BENCHMARK(BM_PoseCompose);

void BM_PoseInverse(benchmark::State& state) {
  Rng rng(2);
  Pose p{rng.rotation(), rng.gaussian_vec3(1.0)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.inverse());
  }
}
BENCHMARK(BM_PoseInverse);

void BM_ToAxisAngle(benchmark::State& state) {
  Rng rng(3);
  Rotation r = Rotation::from_axis_angle(rng.unit_vector(), 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(to_axis_angle(r));
  }
}
BENCHMARK(BM_ToAxisAngle);

void BM_RotationBetweenVectors(benchmark::State& state) {
  Rng rng(4);
  Vec3 u = rng.unit_vector();
  Vec3 v = rng.unit_vector();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotation_between_vectors(u, v));
  }
}
BENCHMARK(BM_RotationBetweenVectors);

}  // namespace
