// SPDX-License-Identifier: Apache-2.0
#include "robocal/pose_log.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

namespace robocal {

namespace {

using nlohmann::json;

bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, const std::string& origin, int line) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin, line, "expected a number, got '" + s + "'");
  }
}

Rotation quaternion_field(double w, double x, double y, double z, const std::string& origin,
                          int line) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(n - 1.0) > 1e-3) {
    throw ParseError(origin, line,
                     "quaternion norm " + std::to_string(n) + " too far from 1");
  }
  return Rotation::from_quaternion(w, x, y, z);
}

PosePairSample parse_csv_record(const std::string& line_text, const std::string& origin,
                                int line) {
  std::vector<std::string> f = split_csv(line_text);
  if (f.size() != 15) {
    throw ParseError(origin, line,
                     "expected 15 comma-separated fields, got " + std::to_string(f.size()));
  }
  double v[15];
  for (int i = 0; i < 15; ++i) v[i] = parse_number(f[static_cast<size_t>(i)], origin, line);
  PosePairSample s;
  s.timestamp = v[0];
  s.head_pose = Pose{quaternion_field(v[4], v[5], v[6], v[7], origin, line), Vec3(v[1], v[2], v[3])};
  s.device_pose =
      Pose{quaternion_field(v[11], v[12], v[13], v[14], origin, line), Vec3(v[8], v[9], v[10])};
  return s;
}

Pose parse_json_pose(const json& j, const std::string& origin, int line) {
  if (!j.is_object() || !j.contains("t") || !j.contains("q")) {
    throw ParseError(origin, line, "pose object needs 't' [x,y,z] and 'q' [w,x,y,z]");
  }
  auto t = j.at("t");
  auto q = j.at("q");
  if (!t.is_array() || t.size() != 3 || !q.is_array() || q.size() != 4) {
    throw ParseError(origin, line, "pose 't' must have 3 elements and 'q' 4");
  }
  return Pose{quaternion_field(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                               q[3].get<double>(), origin, line),
              Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>())};
}

PosePairSample parse_jsonl_record(const std::string& line_text, const std::string& origin,
                                  int line) {
  json j;
  try {
    j = json::parse(line_text);
  } catch (const json::exception& e) {
    throw ParseError(origin, line, std::string("invalid JSON: ") + e.what());
  }
  if (!j.contains("t") || !j.contains("head") || !j.contains("device")) {
    throw ParseError(origin, line, "record needs 't', 'head' and 'device'");
  }
  PosePairSample s;
  s.timestamp = j.at("t").get<double>();
  s.head_pose = parse_json_pose(j.at("head"), origin, line);
  s.device_pose = parse_json_pose(j.at("device"), origin, line);
  return s;
}

void print_pose_csv(std::ostream& out, const Pose& p) {
  char buf[256];
  Eigen::Quaterniond q = p.rotation.quaternion();
  std::snprintf(buf, sizeof(buf), ",%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g",
                p.translation.x(), p.translation.y(), p.translation.z(), q.w(), q.x(), q.y(),
                q.z());
  out << buf;
}

}  // namespace

std::vector<PosePairSample> read_pose_log(std::istream& in, const std::string& origin) {
  std::vector<PosePairSample> samples;
  std::string line_text;
  int line = 0;
  double prev_time = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line_text)) {
    ++line;
    if (blank_or_comment(line_text)) continue;
    size_t first = line_text.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;

    PosePairSample s;
    if (line_text[first] == '{') {
      s = parse_jsonl_record(line_text, origin, line);
    } else {
      // Skip a CSV header row (first field not numeric).
      if (samples.empty()) {
        std::string head = split_csv(line_text).front();
        char* end = nullptr;
        std::strtod(head.c_str(), &end);
        if (end == head.c_str()) continue;
      }
      s = parse_csv_record(line_text, origin, line);
    }
    if (s.timestamp < prev_time) {
      throw ParseError(origin, line, "timestamps must be non-decreasing");
    }
    prev_time = s.timestamp;
    samples.push_back(s);
  }
  return samples;
}

std::vector<PosePairSample> read_pose_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open pose log '" + path + "'");
  }
  return read_pose_log(in, path);
}

void write_pose_log_csv(std::ostream& out, const std::vector<PosePairSample>& samples) {
  out << "timestamp,head_tx,head_ty,head_tz,head_qw,head_qx,head_qy,head_qz,"
         "dev_tx,dev_ty,dev_tz,dev_qw,dev_qx,dev_qy,dev_qz\n";
  char buf[64];
  for (const PosePairSample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%.9f", s.timestamp);
    out << buf;
    print_pose_csv(out, s.head_pose);
    print_pose_csv(out, s.device_pose);
    out << "\n";
  }
}

void write_pose_log_jsonl(std::ostream& out, const std::vector<PosePairSample>& samples) {
  for (const PosePairSample& s : samples) {
    json j;
    j["t"] = s.timestamp;
    Eigen::Quaterniond hq = s.head_pose.rotation.quaternion();
    Eigen::Quaterniond dq = s.device_pose.rotation.quaternion();
    j["head"] = {{"t", {s.head_pose.translation.x(), s.head_pose.translation.y(),
                        s.head_pose.translation.z()}},
                 {"q", {hq.w(), hq.x(), hq.y(), hq.z()}}};
    j["device"] = {{"t", {s.device_pose.translation.x(), s.device_pose.translation.y(),
                          s.device_pose.translation.z()}},
                   {"q", {dq.w(), dq.x(), dq.y(), dq.z()}}};
    out << j.dump() << "\n";
  }
}

std::vector<FloorObservation> read_floor_csv(std::istream& in, const std::string& origin) {
  std::vector<FloorObservation> out;
  std::string line_text;
  int line = 0;
  while (std::getline(in, line_text)) {
    ++line;
    if (blank_or_comment(line_text)) continue;
    std::vector<std::string> f = split_csv(line_text);
    if (out.empty()) {
      char* end = nullptr;
      std::strtod(f.front().c_str(), &end);
      if (end == f.front().c_str()) continue;  // header
    }
    if (f.size() != 4) {
      throw ParseError(origin, line, "expected nx,ny,nz,height_m");
    }
    Vec3 n(parse_number(f[0], origin, line), parse_number(f[1], origin, line),
           parse_number(f[2], origin, line));
    double h = parse_number(f[3], origin, line);
    if (std::abs(n.norm() - 1.0) > 1e-3) {
      throw ParseError(origin, line, "floor normal is not unit length");
    }
    if (h <= 0.0) {
      throw ParseError(origin, line, "height must be positive");
    }
    out.push_back(FloorObservation(n.normalized(), h));
  }
  return out;
}

std::vector<FloorObservation> read_floor_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open floor observation file '" + path + "'");
  }
  return read_floor_csv(in, path);
}

void write_floor_csv(std::ostream& out, const std::vector<FloorObservation>& observations) {
  out << "nx,ny,nz,height_m\n";
  char buf[160];
  for (const FloorObservation& f : observations) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", f.normal.x(), f.normal.y(),
                  f.normal.z(), f.height);
    out << buf;
  }
}

}  // namespace robocal
