// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random draws for the simulator and tests. mt19937_64 output
// is pinned by the standard; the Gaussian transform (Marsaglia polar) is
// implemented here because std::normal_distribution sequences differ across
// standard libraries, which would break same-seed stream reproducibility.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "robocal/geometry.hpp"

namespace robocal {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Gaussian draw; returns the mean exactly when stddev == 0.
  double gaussian(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    if (has_cached_) {
      has_cached_ = false;
      return mean + stddev * cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return mean + stddev * u * f;
  }

  Vec3 gaussian_vec3(double stddev) {
    return Vec3(gaussian(0.0, stddev), gaussian(0.0, stddev), gaussian(0.0, stddev));
  }

  /// Uniform direction on the unit sphere.
  Vec3 unit_vector() {
    Vec3 v;
    do {
      v = Vec3(gaussian(0.0, 1.0), gaussian(0.0, 1.0), gaussian(0.0, 1.0));
    } while (v.norm() < 1e-12);
    return v.normalized();
  }

  /// Uniform rotation on SO(3) (normalized 4-Gaussian quaternion).
  Rotation rotation() {
    double w, x, y, z, n;
    do {
      w = gaussian(0.0, 1.0);
      x = gaussian(0.0, 1.0);
      y = gaussian(0.0, 1.0);
      z = gaussian(0.0, 1.0);
      n = std::sqrt(w * w + x * x + y * y + z * z);
    } while (n < 1e-12);
    return Rotation::from_quaternion(w / n, x / n, y / n, z / n);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace robocal
