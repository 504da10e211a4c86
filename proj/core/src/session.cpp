// SPDX-License-Identifier: Apache-2.0
#include "robocal/session.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace robocal {

const char* to_string(MotionClass m) {
  switch (m) {
    case MotionClass::HorizontalRotation: return "horizontal-rotation";
    case MotionClass::VerticalRotation: return "vertical-rotation";
    case MotionClass::ForwardTranslation: return "forward-translation";
    case MotionClass::Complex: return "complex";
    case MotionClass::Negligible: return "negligible";
  }
  return "?";
}

std::vector<std::string> ParameterMask::missing_names() const {
  std::vector<std::string> out;
  if (!t_x) out.push_back("t_x");
  if (!t_y) out.push_back("t_y");
  if (!t_z) out.push_back("t_z");
  if (!roll) out.push_back("roll");
  if (!pitch) out.push_back("pitch");
  if (!yaw) out.push_back("yaw");
  return out;
}

FloorObservation::FloorObservation(const Vec3& n, double h) : normal(n), height(h) {
  if (std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error("floor normal must be a unit vector");
  }
  if (!(height > 0.0)) {
    throw Error("floor observation height must be positive");
  }
}

RobotKinematics::RobotKinematics(const Vec3& b, double h) : head_to_foot(b), head_height(h) {
  if (!(head_height > 0.0)) {
    throw Error("head height must be positive");
  }
}

Transition relative_transition(const PosePairSample& before, const PosePairSample& after) {
  return Transition{before.head_pose.inverse() * after.head_pose,
                    before.device_pose.inverse() * after.device_pose};
}

MotionClass classify_motion(const Transition& t, const ClassifyConfig& cfg) {
  double angle = t.a.rotation.angle();
  double translation = t.a.translation.norm();

  if (angle < cfg.min_angle) {
    return translation < cfg.min_translation ? MotionClass::Negligible
                                             : MotionClass::ForwardTranslation;
  }

  // The transition already lives in the pre-transition head frame, so the
  // reference vertical is simply +z.
  Vec3 axis = to_axis_angle(t.a.rotation).axis;
  double from_vertical = std::min(angle_between(axis, Vec3::UnitZ()),
                                  angle_between(axis, -Vec3::UnitZ()));
  if (from_vertical <= cfg.axis_tolerance && translation < cfg.max_incidental_translation) {
    return MotionClass::HorizontalRotation;
  }
  double from_horizontal = std::abs(kPi / 2.0 - angle_between(axis, Vec3::UnitZ()));
  if (from_horizontal <= cfg.axis_tolerance && translation < cfg.max_incidental_translation) {
    return MotionClass::VerticalRotation;
  }
  return MotionClass::Complex;
}

ParameterMask constrained_parameters(MotionClass m) {
  ParameterMask mask;
  switch (m) {
    case MotionClass::HorizontalRotation:
      mask.roll = mask.pitch = true;
      mask.t_x = mask.t_y = true;
      break;
    case MotionClass::VerticalRotation:
      mask.roll = mask.yaw = true;
      mask.t_x = mask.t_z = true;
      break;
    case MotionClass::ForwardTranslation:
      mask.pitch = mask.yaw = true;
      break;
    case MotionClass::Complex:
    case MotionClass::Negligible:
      break;
  }
  return mask;
}

ParameterMask constrained_parameters(const Transition& t, MotionClass m,
                                     const ClassifyConfig& cfg) {
  if (m != MotionClass::Complex) {
    return constrained_parameters(m);
  }
  ParameterMask mask;
  if (t.a.rotation.angle() < cfg.min_angle) {
    return mask;
  }
  Vec3 axis = to_axis_angle(t.a.rotation).axis;
  // A rotation constrains the two rotational and the two translational
  // parameters whose named axes are perpendicular to the rotation axis.
  const double kPerp = 1.0 / std::sqrt(2.0);
  bool perp[3];
  for (int i = 0; i < 3; ++i) {
    perp[i] = std::abs(axis[i]) < kPerp;
  }
  mask.roll = perp[0];
  mask.pitch = perp[1];
  mask.yaw = perp[2];
  mask.t_x = perp[0];
  mask.t_y = perp[1];
  mask.t_z = perp[2];
  return mask;
}

ObservabilityReport observability_report(const std::vector<Transition>& transitions,
                                         bool has_floor_obs, const ClassifyConfig& cfg,
                                         double rank_tolerance) {
  ObservabilityReport report;
  report.has_floor = has_floor_obs;

  std::vector<Vec3> axis_columns;
  Eigen::MatrixXd translation_rows(0, 3);
  std::vector<Eigen::Matrix3d> blocks;

  for (const Transition& t : transitions) {
    MotionClass m = classify_motion(t, cfg);
    report.mask = report.mask | constrained_parameters(t, m, cfg);
    switch (m) {
      case MotionClass::Negligible:
        ++report.negligible_count;
        break;
      case MotionClass::Complex:
        ++report.complex_count;
        [[fallthrough]];
      case MotionClass::HorizontalRotation:
      case MotionClass::VerticalRotation:
        axis_columns.push_back(to_axis_angle(t.a.rotation).axis);
        blocks.push_back(Eigen::Matrix3d::Identity() - t.a.rotation.matrix());
        break;
      case MotionClass::ForwardTranslation:
        axis_columns.push_back(t.a.translation.normalized());
        break;
    }
  }

  if (has_floor_obs) {
    report.mask.t_z = true;
  }

  if (!axis_columns.empty()) {
    Eigen::MatrixXd ka(3, static_cast<int>(axis_columns.size()));
    for (int i = 0; i < ka.cols(); ++i) ka.col(i) = axis_columns[static_cast<size_t>(i)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ka);
    double smax = svd.singularValues()(0);
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > rank_tolerance * smax) ++report.rotation_rank;
    }
  }

  if (!blocks.empty()) {
    Eigen::MatrixXd stacked(3 * static_cast<int>(blocks.size()), 3);
    for (size_t i = 0; i < blocks.size(); ++i) {
      stacked.middleRows<3>(3 * static_cast<int>(i)) = blocks[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    double smax = svd.singularValues()(0);
    if (smax > 0.0) {
      for (int i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > rank_tolerance * smax) ++report.translation_rank;
      }
    }
  }

  return report;
}

std::vector<Transition> segment_transitions(const std::vector<PosePairSample>& samples,
                                            const SegmentConfig& cfg) {
  std::vector<Transition> out;
  if (samples.size() < 2) return out;

  // Mark each sample-to-sample step as moving or still, from the head stream.
  const size_t n = samples.size();
  std::vector<bool> moving(n, false);  // moving[i]: step into sample i
  for (size_t i = 1; i < n; ++i) {
    Transition step = relative_transition(samples[i - 1], samples[i]);
    moving[i] = step.a.rotation.angle() > cfg.still_angle ||
                step.a.translation.norm() > cfg.still_translation;
  }

  struct Run {
    bool still;
    size_t first, last;  // sample indices, inclusive
  };
  std::vector<Run> runs;
  runs.push_back(Run{true, 0, 0});  // sample 0 starts at rest by definition
  for (size_t i = 1; i < n; ++i) {
    bool still = !moving[i];
    if (still == runs.back().still) {
      runs.back().last = i;
    } else {
      runs.push_back(Run{still, i, i});
    }
  }

  auto endpoint = [&](const Run& rest, bool at_end) {
    std::vector<Pose> heads, devices;
    double edge = at_end ? samples[rest.last].timestamp : samples[rest.first].timestamp;
    for (size_t i = rest.first; i <= rest.last; ++i) {
      double dt = std::abs(samples[i].timestamp - edge);
      if (dt <= cfg.endpoint_window) {
        heads.push_back(samples[i].head_pose);
        devices.push_back(samples[i].device_pose);
      }
    }
    return PosePairSample{average_poses(heads), average_poses(devices), edge};
  };

  // A motion run bounded by rests on both sides becomes one transition.
  for (size_t r = 1; r + 1 < runs.size(); ++r) {
    if (runs[r].still) continue;
    const Run& before = runs[r - 1];
    const Run& after = runs[r + 1];
    if (!before.still || !after.still) continue;
    long before_len = static_cast<long>(before.last - before.first) + 1;
    long after_len = static_cast<long>(after.last - after.first) + 1;
    if (before_len < cfg.min_still_samples || after_len < cfg.min_still_samples) continue;
    out.push_back(relative_transition(endpoint(before, true), endpoint(after, false)));
  }
  return out;
}

}  // namespace robocal
