// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/camera.h"

#include <Eigen/Geometry>
#include <cmath>
#include <string>

#include "radmap/errors.h"

namespace radmap {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ValidationError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera extents must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw ValidationError("camera principal point (" + std::to_string(cx) + ", " +
                          std::to_string(cy) + ") outside the image");
  }
  if (!cam_to_world.allFinite()) throw ValidationError("camera pose is not finite");
  const Eigen::Matrix3d r = rotation();
  if ((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw ValidationError("camera rotation is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-6) {
    throw ValidationError("camera rotation has determinant != +1");
  }
  const Eigen::RowVector4d bottom = cam_to_world.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("camera pose bottom row must be (0, 0, 0, 1)");
  }
}

Camera Camera::scaled(double factor) const {
  Camera c = *this;
  c.fx *= factor;
  c.fy *= factor;
  c.cx *= factor;
  c.cy *= factor;
  c.width = static_cast<int>(std::lround(width * factor));
  c.height = static_cast<int>(std::lround(height * factor));
  return c;
}

Ray pixel_ray(const Camera& camera, int px, int py) {
  if (px < 0 || py < 0 || px >= camera.width || py >= camera.height) {
    throw UsageError("pixel (" + std::to_string(px) + ", " + std::to_string(py) +
                     ") outside the image");
  }
  const Eigen::Vector3d local((px + 0.5 - camera.cx) / camera.fx,
                              -(py + 0.5 - camera.cy) / camera.fy, -1.0);
  return Ray{camera.position(), (camera.rotation() * local).normalized()};
}

Eigen::Matrix4d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d true_up = right.cross(forward);
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
  pose.block<3, 1>(0, 0) = right;
  pose.block<3, 1>(0, 1) = true_up;
  pose.block<3, 1>(0, 2) = -forward;
  pose.block<3, 1>(0, 3) = eye;
  return pose;
}

Camera camera_from_fov(double angle_x, int width, int height, const Eigen::Matrix4d& pose) {
  Camera c;
  c.width = width;
  c.height = height;
  c.fx = 0.5 * width / std::tan(0.5 * angle_x);
  c.fy = c.fx;
  c.cx = 0.5 * width;
  c.cy = 0.5 * height;
  c.cam_to_world = pose;
  return c;
}

}  // namespace radmap
