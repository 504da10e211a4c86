// SPDX-License-Identifier: Apache-2.0
#include "robocal/geometry.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace robocal {

namespace {

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  double d = (u * v.transpose()).determinant();
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = d < 0.0 ? -1.0 : 1.0;
  return u * fix * v.transpose();
}

}  // namespace

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  double defect = (m * m.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (defect > 1e-9) {
    throw Error("matrix is not orthonormal (defect " + std::to_string(defect) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > 1e-9) {
    throw Error("matrix is not a proper rotation (det != +1)");
  }
  return Rotation(m, Unchecked{});
}

Rotation Rotation::project(const Eigen::Matrix3d& m) {
  return Rotation(nearest_rotation(m), Unchecked{});
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  double n = axis.norm();
  if (n < 1e-12) {
    throw DegenerateGeometryError("axis-angle with zero axis");
  }
  Vec3 k = axis / n;
  return Rotation(Eigen::AngleAxisd(angle, k).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  Eigen::Quaterniond q(w, x, y, z);
  double n = q.norm();
  if (n < 1e-9) {
    throw DegenerateGeometryError("quaternion with near-zero norm");
  }
  q.normalize();
  return Rotation(q.toRotationMatrix(), Unchecked{});
}

Rotation Rotation::rot_x(double a) { return from_axis_angle(Vec3::UnitX(), a); }
Rotation Rotation::rot_y(double a) { return from_axis_angle(Vec3::UnitY(), a); }
Rotation Rotation::rot_z(double a) { return from_axis_angle(Vec3::UnitZ(), a); }

Eigen::Quaterniond Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  return q;
}

double Rotation::angle() const {
  Vec3 skew(m_(2, 1) - m_(1, 2), m_(0, 2) - m_(2, 0), m_(1, 0) - m_(0, 1));
  double s = 0.5 * skew.norm();
  double c = 0.5 * (m_.trace() - 1.0);
  return std::atan2(s, c);
}

double Rotation::angle_to(const Rotation& other) const {
  return (inverse() * other).angle();
}

double Rotation::orthonormality_defect() const {
  return (m_ * m_.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

Rotation Rotation::operator*(const Rotation& rhs) const {
  Eigen::Matrix3d m = m_ * rhs.m_;
  double defect = (m * m.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (defect > 1e-9) {
    m = nearest_rotation(m);
  }
  return Rotation(m, Unchecked{});
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
  return Pose{Rotation::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

AxisAngle to_axis_angle(const Rotation& r, double near_identity_threshold) {
  const Eigen::Matrix3d& m = r.matrix();
  Vec3 skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  double s = 0.5 * skew.norm();
  double c = 0.5 * (m.trace() - 1.0);
  double angle = std::atan2(s, c);
  if (angle < near_identity_threshold) {
    throw NearIdentityError("rotation angle " + std::to_string(angle) +
                            " below axis-extraction threshold");
  }

  Vec3 axis;
  if (angle < kPi - 1e-3) {
    axis = skew / (2.0 * s);
  } else {
    // Near pi the skew part vanishes; recover |k| from the symmetric part:
    // (R + R^T)/2 = cos(a) I + (1 - cos(a)) k k^T.
    Eigen::Matrix3d kkt =
        ((m + m.transpose()) * 0.5 - c * Eigen::Matrix3d::Identity()) / (1.0 - c);
    int imax;
    kkt.diagonal().maxCoeff(&imax);
    axis = kkt.col(imax) / std::sqrt(kkt(imax, imax));
    axis.normalize();
    if (s > 1e-12) {
      // The skew part still fixes the sign.
      if (axis.dot(skew) < 0.0) axis = -axis;
    } else {
      // Exactly pi: make the first nonzero component positive.
      for (int i = 0; i < 3; ++i) {
        if (std::abs(axis[i]) > 1e-9) {
          if (axis[i] < 0.0) axis = -axis;
          break;
        }
      }
    }
  }
  return AxisAngle{axis.normalized(), angle};
}

Rotation from_axis_angle(const AxisAngle& aa) {
  return Rotation::from_axis_angle(aa.axis, aa.angle);
}

Vec3 any_perpendicular(const Vec3& v) {
  double n = v.norm();
  if (n < 1e-12) {
    throw DegenerateGeometryError("perpendicular of zero vector");
  }
  Vec3 u = v / n;
  // Cross with the least-aligned basis vector.
  int imin;
  u.cwiseAbs().minCoeff(&imin);
  Vec3 e = Vec3::Zero();
  e[imin] = 1.0;
  return u.cross(e).normalized();
}

double angle_between(const Vec3& a, const Vec3& b) {
  double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) {
    throw DegenerateGeometryError("angle between zero-length vectors");
  }
  return std::atan2(a.cross(b).norm() / (na * nb), a.dot(b) / (na * nb));
}

VectorAlignment rotation_between_vectors(const Vec3& from, const Vec3& to) {
  double nf = from.norm(), nt = to.norm();
  if (nf < 1e-12 || nt < 1e-12) {
    throw DegenerateGeometryError("rotation_between_vectors with zero-length input");
  }
  Vec3 f = from / nf;
  Vec3 t = to / nt;
  Vec3 cross = f.cross(t);
  double s = cross.norm();
  double c = f.dot(t);
  double angle = std::atan2(s, c);
  if (s < 1e-9) {
    if (c > 0.0) {
      return VectorAlignment{Rotation::identity(), angle, false};
    }
    return VectorAlignment{Rotation::from_axis_angle(any_perpendicular(f), kPi), kPi, true};
  }
  return VectorAlignment{Rotation::from_axis_angle(cross / s, angle), angle, false};
}

Pose average_poses(const std::vector<Pose>& poses) {
  if (poses.empty()) {
    throw Error("average_poses on empty set");
  }
  Vec3 t = Vec3::Zero();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const Pose& p : poses) {
    t += p.translation;
    m += p.rotation.matrix();
  }
  t /= static_cast<double>(poses.size());
  return Pose{Rotation::project(m), t};
}

}  // namespace robocal
