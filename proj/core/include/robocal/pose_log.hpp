// SPDX-License-Identifier: Apache-2.0
//
// Pose-log file format: one record per line with a timestamp, the head pose
// and the device pose, each encoded as translation xyz (meters) plus a unit
// quaternion wxyz. Two encodings are accepted and auto-detected per line:
//
//   CSV   timestamp,head_tx,head_ty,head_tz,head_qw,head_qx,head_qy,head_qz,
//         dev_tx,dev_ty,dev_tz,dev_qw,dev_qx,dev_qy,dev_qz
//         (an optional header row and '#' comment lines are skipped)
//
//   JSONL {"t": <s>, "head": {"t": [x,y,z], "q": [w,x,y,z]},
//          "device": {"t": [x,y,z], "q": [w,x,y,z]}}
//
// Floor observations travel in a CSV sidecar: nx,ny,nz,height_m with the
// normal expressed in the device frame.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robocal/session.hpp"

namespace robocal {

std::vector<PosePairSample> read_pose_log(std::istream& in,
                                          const std::string& origin = "<stream>");
std::vector<PosePairSample> read_pose_log_file(const std::string& path);

void write_pose_log_csv(std::ostream& out, const std::vector<PosePairSample>& samples);
void write_pose_log_jsonl(std::ostream& out, const std::vector<PosePairSample>& samples);

std::vector<FloorObservation> read_floor_csv(std::istream& in,
                                             const std::string& origin = "<stream>");
std::vector<FloorObservation> read_floor_csv_file(const std::string& path);
void write_floor_csv(std::ostream& out, const std::vector<FloorObservation>& observations);

}  // namespace robocal
