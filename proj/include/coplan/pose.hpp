// Copyright 2026 The coplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace coplan {

/// Rigid 4x4 homogeneous transform A_H_B: maps a point expressed in frame B
/// into frame A. Translation is in meters.
class Pose {
 public:
  static constexpr double kTolerance = 1e-9;

  Pose() : m_(Eigen::Matrix4d::Identity()) {}

  /// Throws InvalidPose unless the rotation is orthonormal with det +1 and
  /// the bottom row is (0, 0, 0, 1).
  explicit Pose(const Eigen::Matrix4d& m);
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return Pose(); }
  static Pose translation(double x, double y, double z);
  static Pose rotation(const Eigen::Vector3d& axis, double angle_rad);

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;
  Eigen::Vector3d apply(const Eigen::Vector3d& point) const;

  static bool is_valid(const Eigen::Matrix4d& m, double tol = kTolerance);

 private:
  Eigen::Matrix4d m_;
};

/// robot_H_part = robot_H_tool * tool_H_camera * camera_H_part
Pose pose_in_robot_frame(const Pose& robot_H_tool, const Pose& tool_H_camera,
                         const Pose& camera_H_part);

}  // namespace coplan
