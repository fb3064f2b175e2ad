// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radmap/camera.h"
#include "radmap/dataset.h"

namespace radmap {

enum class Primitive { sphere, plane, textured_cube };

std::string to_string(Primitive p);
Primitive parse_primitive(const std::string& name);  // ValidationError on unknown names

/// Analytic surface radiance. The solid checker alternates between two
/// colours on a 3D grid of `cell_size`; `constant` returns color_a.
struct RadianceSpec {
  enum class Kind { checker, constant };
  Kind kind = Kind::checker;
  Eigen::Vector3d color_a{0.9, 0.55, 0.15};
  Eigen::Vector3d color_b{0.15, 0.35, 0.85};
  double cell_size = 0.5;

  Eigen::Vector3d evaluate(const Eigen::Vector3d& point, const Eigen::Vector3d& view_dir) const;
};

struct SyntheticScene {
  Primitive primitive = Primitive::sphere;
  RadianceSpec radiance;
  std::size_t point_count = 20000;
  double noise_sigma = 0.002;  // isotropic Gaussian jitter, world units
  std::uint64_t seed = 7;

  // Sphere radius, plane half-width or cube half-edge; centred at the origin.
  double size = 1.0;
  int width = 64;
  int height = 64;
  double camera_angle_x = 0.8;
  double camera_distance = 3.5;
  std::size_t test_views = 8;
  Eigen::Vector3d background{1.0, 1.0, 1.0};

  void validate() const;
};

struct SurfaceHit {
  double t = 0.0;
  Eigen::Vector3d point;
};

std::optional<SurfaceHit> intersect(const SyntheticScene& scene, const Ray& ray);

double surface_area(const SyntheticScene& scene);
Aabb primitive_bounds(const SyntheticScene& scene);
// Primitive box inflated by 3 * noise_sigma.
Aabb scene_bbox(const SyntheticScene& scene);

/// Radius threshold equal to the mean point spacing sqrt(area / count).
double spacing_tau(double area, std::size_t point_count);

std::vector<Camera> orbit_cameras(const SyntheticScene& scene, std::size_t n_views);

/// Per-pixel analytic ray cast; never touches the point cloud.
Image render_ground_truth(const SyntheticScene& scene, const Camera& camera);

/// Samples the jittered cloud and renders every view. Test views are spread
/// evenly through the orbit; at least one view stays in the train split.
SceneData generate_scene(const SyntheticScene& scene, std::size_t n_views);

std::string describe(const SyntheticScene& scene);

}  // namespace radmap
