// SPDX-License-Identifier: Apache-2.0
#include "robocal/online.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace robocal {

LocalizedFootprint localize_footprint(const Pose& device_pose_in_map, const Pose& x,
                                      const Pose& head_to_foot_chain) {
  Pose foot = device_pose_in_map * x.inverse() * head_to_foot_chain;
  return LocalizedFootprint{foot, foot.rotation * Vec3::UnitZ()};
}

Correction compute_correction(const Vec3& n_observed, const Vec3& n_prime,
                              const CorrectionConfig& cfg) {
  VectorAlignment align = rotation_between_vectors(n_prime, n_observed);

  Correction c;
  c.angle = align.angle;
  c.degenerate = align.antiparallel;
  if (align.angle > cfg.max_correction) {
    c.anomalous_tilt = true;
    c.r_add = Rotation::identity();
    return c;
  }
  // The alignment construction guarantees this; treat a violation as a
  // numeric fault rather than a recoverable state.
  if ((align.rotation * n_prime.normalized() - n_observed.normalized()).norm() > 1e-9) {
    throw Error("correction rotation failed its alignment post-condition");
  }
  c.r_add = align.rotation;
  return c;
}

Vec3 apply_correction(const Vec3& a_obs, const Rotation& r_add) {
  return r_add * a_obs;
}

CorrectionState correction_step(const CorrectionState& state, const LocalizedFootprint& footprint,
                                const Vec3& floor_normal, const CorrectionConfig& cfg) {
  Correction inst = compute_correction(floor_normal, footprint.up_vector, cfg);

  CorrectionState next = state;
  if (inst.anomalous_tilt) {
    next.last_anomalous = true;
    return next;
  }
  next.last_anomalous = false;

  double alpha = cfg.smoothing;
  if (alpha >= 1.0) {
    next.r_add = inst.r_add;
  } else if (alpha <= 0.0) {
    // keep previous correction
  } else {
    // Geodesic step of size alpha from the current correction toward the
    // instantaneous one.
    Rotation delta = state.r_add.inverse() * inst.r_add;
    double ang = delta.angle();
    if (ang > 1e-12) {
      AxisAngle aa = to_axis_angle(delta, 1e-12);
      next.r_add = state.r_add * Rotation::from_axis_angle(aa.axis, alpha * aa.angle);
    }
  }
  next.last_angle = next.r_add.angle();
  next.angle_history.push_back(next.last_angle);
  if (next.angle_history.size() > next.history_capacity) {
    next.angle_history.erase(next.angle_history.begin(),
                             next.angle_history.begin() +
                                 static_cast<long>(next.angle_history.size() -
                                                   next.history_capacity));
  }
  return next;
}

PlaneFit estimate_floor_normal(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw DegenerateGeometryError("plane fit needs at least 3 points");
  }
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  // eigenvalues ascending: [0] out-of-plane spread, [1] must be nonzero for
  // the points to span a plane.
  double scale = eig.eigenvalues()(2);
  if (scale <= 0.0 || eig.eigenvalues()(1) <= 1e-12 * scale) {
    throw DegenerateGeometryError("plane fit on collinear or coincident points");
  }

  Vec3 normal = eig.eigenvectors().col(0).normalized();
  if (normal.z() < 0.0) {
    normal = -normal;
  } else if (normal.z() == 0.0) {
    for (int i = 0; i < 2; ++i) {
      if (std::abs(normal[i]) > 1e-12) {
        if (normal[i] < 0.0) normal = -normal;
        break;
      }
    }
  }

  PlaneFit fit;
  fit.normal = normal;
  fit.centroid = centroid;
  fit.rms_residual = std::sqrt(eig.eigenvalues()(0) / static_cast<double>(points.size()));
  return fit;
}

}  // namespace robocal
