// SPDX-License-Identifier: Apache-2.0
#include "robocal/result_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace robocal {

namespace {

using nlohmann::json;

json mask_to_json(const ParameterMask& m) {
  return json{{"t_x", m.t_x}, {"t_y", m.t_y}, {"t_z", m.t_z},
              {"roll", m.roll}, {"pitch", m.pitch}, {"yaw", m.yaw}};
}

ParameterMask mask_from_json(const json& j) {
  ParameterMask m;
  m.t_x = j.value("t_x", false);
  m.t_y = j.value("t_y", false);
  m.t_z = j.value("t_z", false);
  m.roll = j.value("roll", false);
  m.pitch = j.value("pitch", false);
  m.yaw = j.value("yaw", false);
  return m;
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::string result_to_json(const CalibrationResult& r) {
  json j;
  j["translation_m"] = vec_to_json(r.x.translation);
  Eigen::Quaterniond q = r.x.rotation.quaternion();
  j["rotation_quat_wxyz"] = json::array({q.w(), q.x(), q.y(), q.z()});
  double angle = r.x.rotation.angle();
  if (angle > 1e-9) {
    AxisAngle aa = to_axis_angle(r.x.rotation, 1e-9);
    j["rotation_axis"] = vec_to_json(aa.axis);
    j["rotation_angle_rad"] = aa.angle;
  } else {
    j["rotation_axis"] = vec_to_json(Vec3::UnitZ());
    j["rotation_angle_rad"] = 0.0;
  }
  j["rotation_residual_rad"] = r.rotation_residual_rad;
  j["translation_residual_m"] = r.translation_residual_m;
  j["observability"] = mask_to_json(r.observability);
  j["diagnostics"] = {{"rotation_rank", r.report.rotation_rank},
                      {"translation_rank", r.report.translation_rank},
                      {"has_floor", r.report.has_floor},
                      {"complex_transitions", r.report.complex_count},
                      {"negligible_transitions", r.report.negligible_count},
                      {"translation_condition",
                       std::isfinite(r.translation_condition) ? json(r.translation_condition)
                                                              : json("inf")},
                      {"under_constrained", r.under_constrained}};
  if (r.free_rotation_axis) {
    j["diagnostics"]["free_rotation_axis"] = vec_to_json(*r.free_rotation_axis);
  }
  if (!r.translation_null_directions.empty()) {
    json dirs = json::array();
    for (const Vec3& d : r.translation_null_directions) dirs.push_back(vec_to_json(d));
    j["diagnostics"]["translation_null_directions"] = dirs;
  }
  if (r.refine) {
    j["refine"] = {{"iterations", r.refine->iterations},
                   {"converged", r.refine->converged},
                   {"initial_objective", r.refine->initial_objective},
                   {"final_objective", r.refine->final_objective}};
  }
  return j.dump(2) + "\n";
}

CalibrationResult result_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(origin, 0, std::string("invalid JSON: ") + e.what());
  }
  CalibrationResult r;
  auto t = j.at("translation_m");
  r.x.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  auto q = j.at("rotation_quat_wxyz");
  r.x.rotation = Rotation::from_quaternion(q[0].get<double>(), q[1].get<double>(),
                                           q[2].get<double>(), q[3].get<double>());
  r.rotation_residual_rad = j.value("rotation_residual_rad", 0.0);
  r.translation_residual_m = j.value("translation_residual_m", 0.0);
  if (j.contains("observability")) r.observability = mask_from_json(j.at("observability"));
  if (j.contains("diagnostics")) {
    const json& d = j.at("diagnostics");
    r.report.rotation_rank = d.value("rotation_rank", 0);
    r.report.translation_rank = d.value("translation_rank", 0);
    r.report.has_floor = d.value("has_floor", false);
    r.report.complex_count = d.value("complex_transitions", 0);
    r.report.negligible_count = d.value("negligible_transitions", 0);
    r.under_constrained = d.value("under_constrained", false);
    if (d.contains("translation_condition") && d.at("translation_condition").is_number()) {
      r.translation_condition = d.at("translation_condition").get<double>();
    } else {
      r.translation_condition = std::numeric_limits<double>::infinity();
    }
  }
  if (j.contains("refine")) {
    RefineInfo info;
    info.iterations = j.at("refine").value("iterations", 0);
    info.converged = j.at("refine").value("converged", true);
    info.initial_objective = j.at("refine").value("initial_objective", 0.0);
    info.final_objective = j.at("refine").value("final_objective", 0.0);
    r.refine = info;
  }
  r.report.mask = r.observability;
  return r;
}

void write_result_file(const std::string& path, const CalibrationResult& result) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write result file '" + path + "'");
  }
  out << result_to_json(result);
  if (!out) {
    throw Error("failed writing result file '" + path + "'");
  }
}

CalibrationResult read_result_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open result file '" + path + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return result_from_json(text.str(), path);
}

std::string result_summary(const CalibrationResult& r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "translation (m):  [%.6f, %.6f, %.6f]\n",
                r.x.translation.x(), r.x.translation.y(), r.x.translation.z());
  out << buf;
  Eigen::Quaterniond q = r.x.rotation.quaternion();
  std::snprintf(buf, sizeof(buf), "rotation (quat wxyz): [%.6f, %.6f, %.6f, %.6f]\n", q.w(),
                q.x(), q.y(), q.z());
  out << buf;
  double angle = r.x.rotation.angle();
  if (angle > 1e-9) {
    AxisAngle aa = to_axis_angle(r.x.rotation, 1e-9);
    std::snprintf(buf, sizeof(buf), "rotation (axis-angle): axis [%.6f, %.6f, %.6f], %.6f rad\n",
                  aa.axis.x(), aa.axis.y(), aa.axis.z(), aa.angle);
    out << buf;
  } else {
    out << "rotation (axis-angle): identity\n";
  }
  std::snprintf(buf, sizeof(buf), "residuals: rotation %.3e rad, translation %.3e m\n",
                r.rotation_residual_rad, r.translation_residual_m);
  out << buf;
  out << "observability:";
  const char* names[6] = {"t_x", "t_y", "t_z", "roll", "pitch", "yaw"};
  const bool bits[6] = {r.observability.t_x, r.observability.t_y, r.observability.t_z,
                        r.observability.roll, r.observability.pitch, r.observability.yaw};
  for (int i = 0; i < 6; ++i) {
    out << " " << names[i] << (bits[i] ? "+" : "-");
  }
  out << "\n";
  if (r.refine) {
    std::snprintf(buf, sizeof(buf), "refine: %d iterations, %s, objective %.3e -> %.3e\n",
                  r.refine->iterations, r.refine->converged ? "converged" : "max-iters",
                  r.refine->initial_objective, r.refine->final_objective);
    out << buf;
  }
  return out.str();
}

}  // namespace robocal
