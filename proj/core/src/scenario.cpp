// SPDX-License-Identifier: Apache-2.0
#include "robocal/scenario.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace robocal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ParseError(origin, 0, what);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& origin, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) ok = true;
    }
    if (!ok) fail(origin, "unknown key '" + it.key() + "' in " + where);
  }
}

double get_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Pose parse_pose(const json& j, const std::string& origin) {
  check_keys(j, {"translation", "quat_wxyz"}, origin, "pose");
  Pose p;
  if (j.contains("translation")) {
    auto t = j.at("translation");
    if (!t.is_array() || t.size() != 3) fail(origin, "pose translation must be [x,y,z]");
    p.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  }
  if (j.contains("quat_wxyz")) {
    auto q = j.at("quat_wxyz");
    if (!q.is_array() || q.size() != 4) fail(origin, "pose quat_wxyz must be [w,x,y,z]");
    p.rotation = Rotation::from_quaternion(q[0].get<double>(), q[1].get<double>(),
                                           q[2].get<double>(), q[3].get<double>());
  }
  return p;
}

MotionCommand parse_command(const json& j, const std::string& origin) {
  if (!j.is_object() || !j.contains("cmd")) fail(origin, "script entries need a 'cmd'");
  std::string cmd = j.at("cmd").get<std::string>();
  if (cmd == "hold") {
    check_keys(j, {"cmd", "duration"}, origin, "hold");
    return Hold{get_or(j, "duration", 1.0)};
  }
  if (cmd == "rotate") {
    check_keys(j, {"cmd", "rate", "duration"}, origin, "rotate");
    return RotateInPlace{get_or(j, "rate", 0.3), get_or(j, "duration", 2.0)};
  }
  if (cmd == "forward") {
    check_keys(j, {"cmd", "speed", "duration"}, origin, "forward");
    return Forward{get_or(j, "speed", 0.3), get_or(j, "duration", 2.0)};
  }
  if (cmd == "head_move") {
    check_keys(j, {"cmd", "pitch", "yaw", "duration"}, origin, "head_move");
    return HeadMove{get_or(j, "pitch", 0.0), get_or(j, "yaw", 0.0), get_or(j, "duration", 1.0)};
  }
  if (cmd == "shake_head") {
    check_keys(j, {"cmd", "amplitude", "frequency", "duration"}, origin, "shake_head");
    return ShakeHead{get_or(j, "amplitude", 0.4), get_or(j, "frequency", 1.2),
                     get_or(j, "duration", 10.0)};
  }
  fail(origin, "unknown script command '" + cmd + "'");
}

json command_to_json(const MotionCommand& c) {
  json j;
  std::visit(
      [&](const auto& cmd) {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, Hold>) {
          j = {{"cmd", "hold"}, {"duration", cmd.duration}};
        } else if constexpr (std::is_same_v<T, RotateInPlace>) {
          j = {{"cmd", "rotate"}, {"rate", cmd.rate}, {"duration", cmd.duration}};
        } else if constexpr (std::is_same_v<T, Forward>) {
          j = {{"cmd", "forward"}, {"speed", cmd.speed}, {"duration", cmd.duration}};
        } else if constexpr (std::is_same_v<T, HeadMove>) {
          j = {{"cmd", "head_move"},
               {"pitch", cmd.pitch_delta},
               {"yaw", cmd.yaw_delta},
               {"duration", cmd.duration}};
        } else if constexpr (std::is_same_v<T, ShakeHead>) {
          j = {{"cmd", "shake_head"},
               {"amplitude", cmd.amplitude},
               {"frequency", cmd.frequency},
               {"duration", cmd.duration}};
        }
      },
      c);
  return j;
}

}  // namespace

Scenario parse_scenario_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(origin, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(origin, "scenario must be a JSON object");
  check_keys(j,
             {"name", "seed", "dt", "obs_every", "head_height", "x_true", "noise", "floor",
              "script", "hold_window", "shake", "correction", "accel_limit_linear",
              "accel_limit_angular"},
             origin, "scenario");

  Scenario s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("seed")) s.sim.seed = j.at("seed").get<std::uint64_t>();
  s.sim.dt = get_or(j, "dt", s.sim.dt);
  if (s.sim.dt <= 0.0) fail(origin, "dt must be positive");
  if (j.contains("obs_every")) s.sim.observe_every = j.at("obs_every").get<int>();
  if (s.sim.observe_every < 1) fail(origin, "obs_every must be >= 1");
  s.sim.head_height = get_or(j, "head_height", s.sim.head_height);
  if (s.sim.head_height <= 0.0) fail(origin, "head_height must be positive");
  s.sim.accel_limit_linear = get_or(j, "accel_limit_linear", s.sim.accel_limit_linear);
  s.sim.accel_limit_angular = get_or(j, "accel_limit_angular", s.sim.accel_limit_angular);
  if (j.contains("x_true")) s.sim.x_true = parse_pose(j.at("x_true"), origin);

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n,
               {"joint_angle", "device_position", "device_orientation", "floor_point", "gamma1",
                "gamma2", "a", "b"},
               origin, "noise");
    NoiseConfig& nc = s.sim.noise;
    nc.joint_angle = get_or(n, "joint_angle", nc.joint_angle);
    nc.device_position = get_or(n, "device_position", nc.device_position);
    nc.device_orientation = get_or(n, "device_orientation", nc.device_orientation);
    nc.floor_point = get_or(n, "floor_point", nc.floor_point);
    nc.gamma1 = get_or(n, "gamma1", nc.gamma1);
    nc.gamma2 = get_or(n, "gamma2", nc.gamma2);
    nc.slip_mean = get_or(n, "a", nc.slip_mean);
    nc.slip_dev = get_or(n, "b", nc.slip_dev);
    if (nc.slip_mean <= 0.0) fail(origin, "slip mean 'a' must be positive");
  }

  if (j.contains("floor")) {
    const json& f = j.at("floor");
    check_keys(f, {"enabled", "patch_points", "patch_radius"}, origin, "floor");
    s.sim.floor_observations = f.contains("enabled") ? f.at("enabled").get<bool>() : true;
    if (f.contains("patch_points")) s.sim.floor_patch_points = f.at("patch_points").get<int>();
    if (f.contains("patch_radius")) s.sim.floor_patch_radius = f.at("patch_radius").get<double>();
    if (s.sim.floor_patch_points < 3) fail(origin, "floor patch_points must be >= 3");
  }

  if (j.contains("script")) {
    if (!j.at("script").is_array()) fail(origin, "script must be an array");
    for (const json& c : j.at("script")) {
      MotionCommand cmd = parse_command(c, origin);
      bool positive = std::visit([](const auto& v) { return v.duration > 0.0; }, cmd);
      if (!positive) fail(origin, "script command durations must be positive");
      s.script.push_back(cmd);
    }
  }

  s.session.hold_window = get_or(j, "hold_window", s.session.hold_window);

  if (j.contains("shake")) {
    const json& sh = j.at("shake");
    check_keys(sh, {"amplitude", "frequency", "duration", "latency", "prescan_points",
                    "prescan_radius"},
               origin, "shake");
    s.shake.amplitude = get_or(sh, "amplitude", s.shake.amplitude);
    s.shake.frequency = get_or(sh, "frequency", s.shake.frequency);
    s.shake.duration = get_or(sh, "duration", s.shake.duration);
    s.shake.encoder_latency = get_or(sh, "latency", s.shake.encoder_latency);
    if (s.shake.encoder_latency < 0.0) fail(origin, "shake latency must be >= 0");
    if (sh.contains("prescan_points")) s.shake.prescan_points = sh.at("prescan_points").get<int>();
    s.shake.prescan_radius = get_or(sh, "prescan_radius", s.shake.prescan_radius);
  }

  if (j.contains("correction")) {
    const json& c = j.at("correction");
    check_keys(c, {"max_correction", "smoothing"}, origin, "correction");
    s.correction.max_correction = get_or(c, "max_correction", s.correction.max_correction);
    s.correction.smoothing = get_or(c, "smoothing", s.correction.smoothing);
  }

  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.sim.seed;
  j["dt"] = s.sim.dt;
  j["obs_every"] = s.sim.observe_every;
  j["head_height"] = s.sim.head_height;
  Eigen::Quaterniond q = s.sim.x_true.rotation.quaternion();
  j["x_true"] = {{"translation",
                  {s.sim.x_true.translation.x(), s.sim.x_true.translation.y(),
                   s.sim.x_true.translation.z()}},
                 {"quat_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
  j["noise"] = {{"joint_angle", s.sim.noise.joint_angle},
                {"device_position", s.sim.noise.device_position},
                {"device_orientation", s.sim.noise.device_orientation},
                {"floor_point", s.sim.noise.floor_point},
                {"gamma1", s.sim.noise.gamma1},
                {"gamma2", s.sim.noise.gamma2},
                {"a", s.sim.noise.slip_mean},
                {"b", s.sim.noise.slip_dev}};
  j["floor"] = {{"enabled", s.sim.floor_observations},
                {"patch_points", s.sim.floor_patch_points},
                {"patch_radius", s.sim.floor_patch_radius}};
  j["hold_window"] = s.session.hold_window;
  j["script"] = json::array();
  for (const MotionCommand& c : s.script) j["script"].push_back(command_to_json(c));
  j["shake"] = {{"amplitude", s.shake.amplitude},
                {"frequency", s.shake.frequency},
                {"duration", s.shake.duration},
                {"latency", s.shake.encoder_latency},
                {"prescan_points", s.shake.prescan_points},
                {"prescan_radius", s.shake.prescan_radius}};
  j["correction"] = {{"max_correction", s.correction.max_correction},
                     {"smoothing", s.correction.smoothing}};
  return j.dump(2) + "\n";
}

std::vector<std::string> builtin_scenario_names() {
  return {"two-way-rotation", "two-way-rotation-noiseless", "horizontal-floor",
          "horizontal-floor-noiseless", "shake", "shake-zero-latency"};
}

bool is_builtin_scenario(const std::string& name) {
  for (const std::string& n : builtin_scenario_names()) {
    if (n == name) return true;
  }
  return false;
}

Scenario builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "two-way-rotation" || name == "two-way-rotation-noiseless") {
    s.script = two_way_rotation_script();
  } else if (name == "horizontal-floor" || name == "horizontal-floor-noiseless") {
    s.script = horizontal_floor_script();
    s.sim.floor_observations = true;
  } else if (name == "shake") {
    s.script = {ShakeHead{s.shake.amplitude, s.shake.frequency, s.shake.duration}};
  } else if (name == "shake-zero-latency") {
    s.shake.encoder_latency = 0.0;
    s.script = {ShakeHead{s.shake.amplitude, s.shake.frequency, s.shake.duration}};
  } else {
    throw Error("unknown built-in scenario '" + name + "'");
  }
  if (name.ends_with("-noiseless")) {
    s.sim.noise = NoiseConfig::none();
  }
  return s;
}

Scenario load_scenario(const std::string& name_or_path) {
  if (is_builtin_scenario(name_or_path)) {
    return builtin_scenario(name_or_path);
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw Error("scenario '" + name_or_path +
                "' is neither a built-in name nor a readable file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario_json(text.str(), name_or_path);
}

}  // namespace robocal
