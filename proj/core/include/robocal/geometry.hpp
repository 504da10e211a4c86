// SPDX-License-Identifier: Apache-2.0
//
// Rigid-body math: rotations, poses, axis-angle and vector-alignment helpers.
//
// Convention: column vectors, left multiplication. Pose a maps points from
// a's local frame into its parent frame via p' = R p + t, and (a * b) applies
// b first, then a. Consequently if M_head is the head pose and X the
// head->device extrinsic, the device pose is M_head * X.
//
// All values are immutable after construction and all operations are pure,
// so everything here is safe to share across threads.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

#include "robocal/error.hpp"

namespace robocal {

using Vec3 = Eigen::Vector3d;

constexpr double kPi = 3.14159265358979323846;

/// Canonical axis-angle form: unit axis, angle in (0, pi].
struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;

  /// True when the angle is within 1e-6 of pi; the axis sign is then only
  /// fixed by the first-nonzero-component-positive rule.
  bool near_pi() const { return angle > kPi - 1e-6; }
};

/// Proper rotation stored as a 3x3 orthonormal matrix (det +1).
/// Quaternion and axis-angle forms are conversion views only.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Validates orthonormality and det within 1e-9; throws Error otherwise.
  static Rotation from_matrix(const Eigen::Matrix3d& m);

  /// Nearest proper rotation (polar decomposition via SVD).
  static Rotation project(const Eigen::Matrix3d& m);

  /// Rodrigues formula. The axis is normalized; throws on a zero axis.
  static Rotation from_axis_angle(const Vec3& axis, double angle);

  /// Unit quaternion (w, x, y, z); normalized, throws on near-zero norm.
  static Rotation from_quaternion(double w, double x, double y, double z);

  static Rotation rot_x(double angle);
  static Rotation rot_y(double angle);
  static Rotation rot_z(double angle);

  const Eigen::Matrix3d& matrix() const { return m_; }

  /// Unit quaternion with non-negative w.
  Eigen::Quaterniond quaternion() const;

  Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }

  /// Rotation angle in [0, pi].
  double angle() const;

  /// Geodesic distance to another rotation, in radians.
  double angle_to(const Rotation& other) const;

  /// max |R R^T - I| element-wise.
  double orthonormality_defect() const;

  /// Composition; re-orthonormalizes when the accumulated defect exceeds 1e-9.
  Rotation operator*(const Rotation& rhs) const;

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  bool approx_equal(const Rotation& other, double tol_rad) const {
    return angle_to(other) <= tol_rad;
  }

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}

  Eigen::Matrix3d m_;
};

/// Rigid transform: rotation plus translation (meters).
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Eigen::Matrix4d matrix() const;
  static Pose from_matrix(const Eigen::Matrix4d& m);

  Pose inverse() const {
    Rotation rinv = rotation.inverse();
    return Pose{rinv, -(rinv * translation)};
  }

  Pose operator*(const Pose& rhs) const {
    return Pose{rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  /// Apply to a point.
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }

  bool approx_equal(const Pose& other, double rot_tol_rad, double trans_tol_m) const {
    return rotation.approx_equal(other.rotation, rot_tol_rad) &&
           (translation - other.translation).norm() <= trans_tol_m;
  }
};

/// Extracts the canonical axis-angle form. Throws NearIdentityError when the
/// rotation angle is below near_identity_threshold (axis undefined there).
AxisAngle to_axis_angle(const Rotation& r, double near_identity_threshold = 1e-6);

Rotation from_axis_angle(const AxisAngle& aa);

/// Result of aligning one direction onto another.
struct VectorAlignment {
  Rotation rotation;
  double angle = 0.0;
  /// The inputs were antiparallel within 1e-9: the rotation is pi about an
  /// arbitrary (but deterministic) perpendicular axis.
  bool antiparallel = false;
};

/// Minimal rotation taking direction `from` onto direction `to`:
/// result.rotation * normalized(from) == normalized(to), and the rotation
/// angle equals the angle between the vectors. Throws DegenerateGeometryError
/// on zero-length input.
VectorAlignment rotation_between_vectors(const Vec3& from, const Vec3& to);

/// Angle between two nonzero vectors, in [0, pi].
double angle_between(const Vec3& a, const Vec3& b);

/// A deterministic unit vector perpendicular to v (v nonzero).
Vec3 any_perpendicular(const Vec3& v);

/// Chordal mean of a set of poses: arithmetic translation mean and the
/// rotation nearest to the matrix mean. Intended for clusters of nearby
/// poses (settled hold windows); throws on an empty input.
Pose average_poses(const std::vector<Pose>& poses);

}  // namespace robocal
