// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

namespace radmap {

/// Pinhole camera with a rigid camera-to-world pose.
///
/// Camera space follows the NeRF/OpenGL convention: +x right, +y up, and the
/// camera looks down its -z axis. Image rows grow downwards with pixel
/// centres at integer + 0.5.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Eigen::Matrix4d cam_to_world = Eigen::Matrix4d::Identity();

  Eigen::Matrix3d rotation() const { return cam_to_world.topLeftCorner<3, 3>(); }
  Eigen::Vector3d position() const { return cam_to_world.topRightCorner<3, 1>(); }
  // Unit world-space direction the camera looks along.
  Eigen::Vector3d view_axis() const { return -cam_to_world.block<3, 1>(0, 2); }

  Eigen::Vector3d world_to_camera(const Eigen::Vector3d& p) const {
    return rotation().transpose() * (p - position());
  }
  // Distance in front of the camera measured along the viewing axis.
  double depth(const Eigen::Vector3d& p) const { return -world_to_camera(p).z(); }

  // Throws ValidationError on a non-rigid pose or out-of-range intrinsics.
  void validate() const;

  // Intrinsics and extents scaled for resampled images; the pose is kept.
  Camera scaled(double factor) const;
};

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unit length
};

/// Ray through the centre of pixel (px, py). Throws UsageError outside the
/// image.
Ray pixel_ray(const Camera& camera, int px, int py);

/// Camera at `eye` looking at `target`, with `up` resolving the roll.
Eigen::Matrix4d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& up);

/// Square-pixel camera from a horizontal field of view, principal point at
/// the image centre.
Camera camera_from_fov(double angle_x, int width, int height, const Eigen::Matrix4d& pose);

}  // namespace radmap
