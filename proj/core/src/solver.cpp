// SPDX-License-Identifier: Apache-2.0
#include "robocal/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robocal {

namespace {

double pair_residual(const Rotation& r, const AxisPair& p) {
  return angle_between(p.k_a, r * p.k_b);
}

double rms_pair_residual(const Rotation& r, const std::vector<AxisPair>& pairs) {
  double s = 0.0;
  for (const AxisPair& p : pairs) {
    double e = pair_residual(r, p);
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(pairs.size()));
}

Rotation procrustes(const std::vector<AxisPair>& pairs) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const AxisPair& p : pairs) {
    m += p.k_a * p.k_b.transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
  fix(2, 2) = ((u * v.transpose()).determinant() < 0.0) ? -1.0 : 1.0;
  return Rotation::project(u * fix * v.transpose());
}

struct SessionStructure {
  std::vector<AxisPair> pairs;
  std::vector<TranslationRow> translation_rows;
  std::vector<FloorRow> floor_rows;
  // Structural observability from classified axes (noise-robust).
  bool rotation_under = false;
  Vec3 free_rotation_axis = Vec3::UnitZ();
  std::vector<Vec3> translation_null;  // requires the rotation estimate for floor rows
  ObservabilityReport report;
  int usable = 0;
};

SessionStructure analyze_session(const CalibrationSession& session, const ClassifyConfig& classify,
                                 double structural_tolerance) {
  SessionStructure s;
  s.report =
      observability_report(session.transitions, !session.floor_observations.empty(), classify);

  for (const Transition& t : session.transitions) {
    MotionClass m = classify_motion(t, classify);
    switch (m) {
      case MotionClass::Negligible:
        continue;
      case MotionClass::ForwardTranslation: {
        if (t.b.translation.norm() < 1e-12) continue;  // device stream degenerate
        s.pairs.push_back(AxisPair{t.a.translation.normalized(), t.b.translation.normalized(), false});
        break;
      }
      case MotionClass::HorizontalRotation:
      case MotionClass::VerticalRotation:
      case MotionClass::Complex: {
        AxisAngle ka = to_axis_angle(t.a.rotation);
        AxisAngle kb = to_axis_angle(t.b.rotation);
        s.pairs.push_back(AxisPair{ka.axis, kb.axis, ka.near_pi() || kb.near_pi()});
        s.translation_rows.push_back(TranslationRow{t.a.rotation, t.a.translation, t.b.translation});
        break;
      }
    }
    ++s.usable;
  }

  if (session.kinematics) {
    for (const FloorObservation& f : session.floor_observations) {
      s.floor_rows.push_back(FloorRow{f, *session.kinematics});
    }
  }

  // Rotation structure: rank of sum k k^T over all pairs.
  if (!s.pairs.empty()) {
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    for (const AxisPair& p : s.pairs) outer += p.k_a * p.k_a.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(outer);
    double emax = eig.eigenvalues()(2);
    int rank = 0;
    for (int i = 0; i < 3; ++i) {
      if (eig.eigenvalues()(i) > structural_tolerance * emax) ++rank;
    }
    if (rank < 2) {
      s.rotation_under = true;
      s.free_rotation_axis = eig.eigenvectors().col(2).normalized();
      if (s.free_rotation_axis.dot(s.pairs.front().k_a) < 0.0) {
        s.free_rotation_axis = -s.free_rotation_axis;
      }
    }
  } else {
    s.rotation_under = true;
  }
  return s;
}

// Translation structure: constrained subspace spanned by the planes
// perpendicular to each rotational axis, plus the floor row directions
// (computed with the solved rotation) when include_floor is set. The
// refinement passes include_floor = false because its objective contains
// transition rows only.
std::vector<Vec3> translation_null_space(const SessionStructure& s, const Rotation& r,
                                         const ClassifyConfig& classify,
                                         double structural_tolerance, bool include_floor) {
  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (const TranslationRow& row : s.translation_rows) {
    Vec3 k = to_axis_angle(row.r_a, classify.min_angle * 0.1).axis;
    info += Eigen::Matrix3d::Identity() - k * k.transpose();
  }
  if (include_floor) {
    for (const FloorRow& f : s.floor_rows) {
      Vec3 d = r * f.obs.normal;
      info += d * d.transpose();
    }
  }
  std::vector<Vec3> nulls;
  if (info.isZero(0.0)) {
    nulls = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    return nulls;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info);
  double emax = eig.eigenvalues()(2);
  for (int i = 0; i < 3; ++i) {
    if (eig.eigenvalues()(i) <= structural_tolerance * emax) {
      nulls.push_back(eig.eigenvectors().col(i).normalized());
    }
  }
  return nulls;
}

std::string guidance_for(const std::string& name) {
  if (name == "t_x" || name == "t_y") return "add horizontal rotation";
  if (name == "t_z") return "add vertical rotation or floor observations";
  if (name == "roll") return "add horizontal or vertical rotation";
  if (name == "pitch") return "add horizontal rotation or forward movement";
  if (name == "yaw") return "add vertical rotation or forward movement";
  return "add more varied motion";
}

}  // namespace

RotationSolve solve_rotation(const std::vector<AxisPair>& pairs, double rank_tolerance) {
  if (pairs.empty()) {
    throw Error("solve_rotation with no axis pairs");
  }

  Eigen::MatrixXd ka(3, static_cast<int>(pairs.size()));
  for (int i = 0; i < ka.cols(); ++i) ka.col(i) = pairs[static_cast<size_t>(i)].k_a;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ka, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  bool parallel = pairs.size() == 1 || sv(1) <= rank_tolerance * sv(0);

  if (parallel) {
    // One free degree of freedom about the common axis; return the
    // minimum-angle rotation aligning the first pair.
    VectorAlignment align = rotation_between_vectors(pairs.front().k_b, pairs.front().k_a);
    Vec3 free_axis = svd.matrixU().col(0).normalized();
    if (free_axis.dot(pairs.front().k_a) < 0.0) free_axis = -free_axis;
    RotationSolve out;
    out.rotation = align.rotation;
    out.rms_residual_rad = rms_pair_residual(out.rotation, pairs);
    out.under_constrained = true;
    out.free_axis = free_axis;
    return out;
  }

  RotationSolve out;
  out.rotation = procrustes(pairs);

  // Near-pi pairs have an inherent relative sign ambiguity; resolve it
  // against the estimate and re-solve once if anything flipped.
  bool flipped = false;
  std::vector<AxisPair> resolved = pairs;
  for (AxisPair& p : resolved) {
    if (!p.near_pi) continue;
    if ((p.k_a + out.rotation * p.k_b).norm() < (p.k_a - out.rotation * p.k_b).norm()) {
      p.k_b = -p.k_b;
      flipped = true;
    }
  }
  if (flipped) {
    out.rotation = procrustes(resolved);
  }
  out.rms_residual_rad = rms_pair_residual(out.rotation, flipped ? resolved : pairs);
  return out;
}

TranslationSolve solve_translation(const std::vector<TranslationRow>& rows, const Rotation& r,
                                   const std::vector<FloorRow>& floor_rows,
                                   double rank_tolerance,
                                   const std::vector<Vec3>& frozen_directions) {
  const int m = 3 * static_cast<int>(rows.size()) + static_cast<int>(floor_rows.size());
  if (m == 0) {
    throw Error("solve_translation with no rows");
  }

  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m);
  int at = 0;
  for (const TranslationRow& row : rows) {
    a.middleRows<3>(at) = Eigen::Matrix3d::Identity() - row.r_a.matrix();
    b.segment<3>(at) = row.t_a - r * row.t_b;
    at += 3;
  }
  for (const FloorRow& f : floor_rows) {
    // n . (R^-1 t) = h + n . (R^-1 b), all in the device frame.
    a.row(at) = (r * f.obs.normal).transpose();
    b(at) = f.obs.height + f.obs.normal.dot(r.inverse() * f.kin.head_to_foot);
    ++at;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv(0);

  TranslationSolve out;
  Eigen::VectorXd uy = svd.matrixU().transpose() * b;
  Vec3 t = Vec3::Zero();
  int rank = 0;
  for (int i = 0; i < sv.size() && i < 3; ++i) {
    if (smax > 0.0 && sv(i) > rank_tolerance * smax) {
      t += (uy(i) / sv(i)) * Vec3(svd.matrixV().col(i));
      ++rank;
    } else {
      out.null_directions.push_back(Vec3(svd.matrixV().col(i)).normalized());
    }
  }
  for (int i = sv.size(); i < 3; ++i) {
    out.null_directions.push_back(Vec3(svd.matrixV().col(i)).normalized());
  }

  // Structurally frozen directions: zero the component and report.
  for (const Vec3& d : frozen_directions) {
    Vec3 dn = d.normalized();
    t -= t.dot(dn) * dn;
    bool known = false;
    for (const Vec3& n : out.null_directions) {
      if (std::abs(n.dot(dn)) > 0.99) known = true;
    }
    if (!known) out.null_directions.push_back(dn);
  }

  out.translation = t;
  out.condition = (rank >= 3 && sv.size() >= 3 && sv(2) > 0.0)
                      ? smax / sv(2)
                      : std::numeric_limits<double>::infinity();
  Eigen::VectorXd res = a * t - b;
  out.rms_residual_m = std::sqrt(res.squaredNorm() / static_cast<double>(m));
  return out;
}

std::vector<AxisPair> extract_axis_pairs(const CalibrationSession& session,
                                         const ClassifyConfig& cfg) {
  return analyze_session(session, cfg, 0.05).pairs;
}

CalibrationResult calibrate(const CalibrationSession& session, const SolveConfig& cfg) {
  if (session.transitions.empty()) {
    throw Error("calibration session has no transitions");
  }
  if (!session.floor_observations.empty() && !session.kinematics) {
    throw Error("floor observations require robot kinematics");
  }

  SessionStructure s = analyze_session(session, cfg.classify, cfg.structural_tolerance);
  if (s.pairs.empty()) {
    throw InsufficientMotionError(
        ParameterMask{}.missing_names(),
        "insufficient motion: no usable transitions (all below motion thresholds)");
  }

  RotationSolve rot = solve_rotation(s.pairs, cfg.rank_tolerance);
  if (s.rotation_under) {
    // Keep the structural verdict even when noise makes the numerical one
    // look full-rank.
    rot.under_constrained = true;
    if (!rot.free_axis) rot.free_axis = s.free_rotation_axis;
  }

  std::vector<Vec3> frozen =
      translation_null_space(s, rot.rotation, cfg.classify, cfg.structural_tolerance, true);

  // Gate on the classification mask plus structural analysis.
  ParameterMask mask = s.report.mask;
  if (!cfg.allow_partial && (!mask.all() || rot.under_constrained || !frozen.empty())) {
    std::vector<std::string> missing = mask.missing_names();
    if (missing.empty()) missing.push_back("(structurally degenerate axis set)");
    std::ostringstream msg;
    msg << "insufficient motion:";
    for (size_t i = 0; i < missing.size(); ++i) {
      msg << (i ? "; " : " ") << missing[i] << " unconstrained (" << guidance_for(missing[i])
          << ")";
    }
    throw InsufficientMotionError(missing, msg.str());
  }

  TranslationSolve trans;
  if (!s.translation_rows.empty() || !s.floor_rows.empty()) {
    trans = solve_translation(s.translation_rows, rot.rotation, s.floor_rows,
                              cfg.rank_tolerance, frozen);
  } else {
    trans.null_directions = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
    trans.condition = std::numeric_limits<double>::infinity();
  }

  CalibrationResult result;
  result.x = Pose{rot.rotation, trans.translation};
  result.rotation_residual_rad = rot.rms_residual_rad;
  result.translation_residual_m = trans.rms_residual_m;
  result.observability = mask;
  result.report = s.report;
  result.translation_condition = trans.condition;
  result.under_constrained = rot.under_constrained || !trans.null_directions.empty();
  result.free_rotation_axis = rot.under_constrained ? rot.free_axis : std::nullopt;
  result.translation_null_directions = trans.null_directions;
  return result;
}

namespace {

// 6-vector residual of one transition at x: [rotvec(E); trans(E)] with
// E = X^-1 A^-1 X B.
Eigen::Matrix<double, 6, 1> transition_residual(const Transition& t, const Pose& x) {
  Pose e = x.inverse() * t.a.inverse() * x * t.b;
  Eigen::Matrix<double, 6, 1> r;
  double angle = e.rotation.angle();
  if (angle < 1e-12) {
    r.head<3>().setZero();
  } else {
    AxisAngle aa = to_axis_angle(e.rotation, 1e-12);
    r.head<3>() = aa.axis * aa.angle;
  }
  r.tail<3>() = e.translation;
  return r;
}

Pose apply_delta(const Pose& x, const Eigen::Matrix<double, 6, 1>& delta) {
  Vec3 w = delta.head<3>();
  double angle = w.norm();
  Rotation dr = angle < 1e-15 ? Rotation::identity() : Rotation::from_axis_angle(w / angle, angle);
  return x * Pose{dr, delta.tail<3>()};
}

}  // namespace

double axxb_objective(const CalibrationSession& session, const Pose& x) {
  ClassifyConfig classify;
  double obj = 0.0;
  for (const Transition& t : session.transitions) {
    if (classify_motion(t, classify) == MotionClass::Negligible) continue;
    obj += transition_residual(t, x).squaredNorm();
  }
  return obj;
}

CalibrationResult refine_nonlinear(const CalibrationSession& session,
                                   const CalibrationResult& initial, const RefineConfig& cfg) {
  std::vector<const Transition*> used;
  for (const Transition& t : session.transitions) {
    if (classify_motion(t, cfg.classify) != MotionClass::Negligible) used.push_back(&t);
  }
  if (used.empty()) {
    throw Error("refine_nonlinear: no usable transitions");
  }

  // Tangent basis with structurally frozen directions removed. Right
  // perturbations X * exp(d): a frozen left-frame direction u maps to
  // R^T u in the tangent.
  SessionStructure s = analyze_session(session, cfg.classify, cfg.structural_tolerance);
  std::vector<Eigen::Matrix<double, 6, 1>> frozen;
  const Eigen::Matrix3d rt = initial.x.rotation.matrix().transpose();
  if (s.rotation_under) {
    Eigen::Matrix<double, 6, 1> v = Eigen::Matrix<double, 6, 1>::Zero();
    v.head<3>() = rt * s.free_rotation_axis;
    frozen.push_back(v.normalized());
  }
  for (const Vec3& n :
       translation_null_space(s, initial.x.rotation, cfg.classify, cfg.structural_tolerance, false)) {
    Eigen::Matrix<double, 6, 1> v = Eigen::Matrix<double, 6, 1>::Zero();
    v.tail<3>() = rt * n;
    frozen.push_back(v.normalized());
  }

  Eigen::Matrix<double, 6, 6> basis = Eigen::Matrix<double, 6, 6>::Identity();
  int kdim = 6;
  if (!frozen.empty()) {
    // Orthonormal complement of the frozen span.
    Eigen::MatrixXd f(6, static_cast<int>(frozen.size()));
    for (int i = 0; i < f.cols(); ++i) f.col(i) = frozen[static_cast<size_t>(i)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(f, Eigen::ComputeFullU);
    int fr = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > 1e-9) ++fr;
    }
    kdim = 6 - fr;
    basis.leftCols(kdim) = svd.matrixU().rightCols(kdim);
  }

  const int m = 6 * static_cast<int>(used.size());
  auto residuals = [&](const Pose& x) {
    Eigen::VectorXd r(m);
    for (size_t i = 0; i < used.size(); ++i) {
      r.segment<6>(6 * static_cast<int>(i)) = transition_residual(*used[i], x);
    }
    return r;
  };

  Pose x = initial.x;
  Eigen::VectorXd r = residuals(x);
  double obj = r.squaredNorm();
  const double initial_obj = obj;

  RefineInfo info;
  info.initial_objective = initial_obj;
  info.converged = false;
  double lambda = 1e-6;
  const double h = 1e-6;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    info.iterations = iter + 1;
    Eigen::MatrixXd jac(m, kdim);
    for (int j = 0; j < kdim; ++j) {
      Eigen::Matrix<double, 6, 1> dir = basis.col(j);
      Eigen::VectorXd rp = residuals(apply_delta(x, h * dir));
      Eigen::VectorXd rm = residuals(apply_delta(x, -h * dir));
      jac.col(j) = (rp - rm) / (2.0 * h);
    }
    Eigen::VectorXd g = jac.transpose() * r;
    Eigen::MatrixXd hess = jac.transpose() * jac;

    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd damped = hess + lambda * Eigen::MatrixXd::Identity(kdim, kdim);
      Eigen::VectorXd xi = damped.ldlt().solve(-g);
      Eigen::Matrix<double, 6, 1> delta = Eigen::Matrix<double, 6, 1>::Zero();
      for (int j = 0; j < kdim; ++j) delta += xi(j) * basis.col(j);
      Pose x_new = apply_delta(x, delta);
      Eigen::VectorXd r_new = residuals(x_new);
      double obj_new = r_new.squaredNorm();
      if (obj_new < obj) {
        double improvement = obj - obj_new;
        x = x_new;
        r = r_new;
        obj = obj_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (delta.norm() < cfg.step_tolerance ||
            improvement < cfg.objective_tolerance * std::max(obj, 1.0)) {
          info.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // No descent direction left at any damping: stationary.
      info.converged = true;
      break;
    }
    if (info.converged) break;
  }

  info.final_objective = obj;

  CalibrationResult out = initial;
  out.x = x;
  out.refine = info;
  if (!s.pairs.empty()) {
    out.rotation_residual_rad = rms_pair_residual(x.rotation, s.pairs);
  }
  return out;
}

}  // namespace robocal
