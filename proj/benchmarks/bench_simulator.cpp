// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "robocal/experiments.hpp"

using namespace robocal;

namespace {

void BM_SimStep(benchmark::State& state) {
  SimConfig cfg;
  Rng rng(1);
  SimState s;
  Vec3 cmd(0.3, 0.0, 0.1);
  for (auto _ : state) {
    step(s, cmd, cfg, rng);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_SimStep);

void BM_Observe(benchmark::State& state) {
  SimConfig cfg;
  cfg.floor_observations = state.range(0) != 0;
  Rng rng(2);
  SimState s;
  for (auto _ : state) {
    benchmark::DoNotOptimize(observe(s, cfg, rng));
  }
}
BENCHMARK(BM_Observe)->Arg(0)->Arg(1);

void BM_RunScriptTwoWay(benchmark::State& state) {
  SimConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_script(two_way_rotation_script(), cfg));
  }
}
BENCHMARK(BM_RunScriptTwoWay);

void BM_MonteCarloTrial(benchmark::State& state) {
  Scenario scenario = builtin_scenario("two-way-rotation");
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate_simulated(scenario, seed++));
  }
}
BENCHMARK(BM_MonteCarloTrial);

void BM_PlaneFit(benchmark::State& state) {
  Rng rng(3);
  std::vector<Vec3> points;
  for (int i = 0; i < state.range(0); ++i) {
    points.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0) +
                     rng.gaussian_vec3(0.02));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_floor_normal(points));
  }
}
BENCHMARK(BM_PlaneFit)->Arg(24)->Arg(256);

void BM_ShakeExperiment(benchmark::State& state) {
  Scenario scenario = builtin_scenario("shake");
  SimConfig sim = scenario.sim;
  ShakeParams shake = scenario.shake;
  shake.duration = 2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(shake_experiment(sim, shake, scenario.correction));
  }
}
BENCHMARK(BM_ShakeExperiment);

}  // namespace
