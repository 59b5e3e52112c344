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

#include "coplan/pose.hpp"

#include <cmath>

#include "coplan/error.hpp"

namespace coplan {

bool Pose::is_valid(const Eigen::Matrix4d& m, double tol) {
  if (!m.allFinite()) return false;
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  if (((r.transpose() * r) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(r.determinant() - 1.0) > tol) return false;
  return m(3, 0) == 0.0 && m(3, 1) == 0.0 && m(3, 2) == 0.0 && m(3, 3) == 1.0;
}

Pose::Pose(const Eigen::Matrix4d& m) : m_(m) {
  if (!is_valid(m_)) throw Error(ErrorCode::InvalidPose, "not a rigid homogeneous transform");
}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : m_(Eigen::Matrix4d::Identity()) {
  m_.topLeftCorner<3, 3>() = rotation;
  m_.topRightCorner<3, 1>() = translation;
  if (!is_valid(m_)) throw Error(ErrorCode::InvalidPose, "rotation is not orthonormal with det +1");
}

Pose Pose::translation(double x, double y, double z) {
  return Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, y, z));
}

Pose Pose::rotation(const Eigen::Vector3d& axis, double angle_rad) {
  if (axis.norm() == 0.0) throw Error(ErrorCode::InvalidPose, "rotation axis is zero");
  return Pose(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(),
              Eigen::Vector3d::Zero());
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.m_ = m_ * rhs.m_;
  if (!is_valid(out.m_)) throw Error(ErrorCode::InvalidPose, "composition drifted off SE(3)");
  return out;
}

Pose Pose::inverse() const {
  const Eigen::Matrix3d rt = rotation().transpose();
  return Pose(rt, -rt * translation());
}

Eigen::Vector3d Pose::apply(const Eigen::Vector3d& point) const {
  return rotation() * point + translation();
}

Pose pose_in_robot_frame(const Pose& robot_H_tool, const Pose& tool_H_camera,
                         const Pose& camera_H_part) {
  return robot_H_tool * tool_H_camera * camera_H_part;
}

}  // namespace coplan
