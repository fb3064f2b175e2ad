// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "radmap/camera.h"
#include "radmap/point_cloud.h"

namespace radmap {

struct RasterConfig {
  double tau = 5e-3;       // radius threshold, world units
  int tile_size = 16;      // pixels per side of a parallel work tile
  int threads = 0;         // 0 = hardware concurrency

  void validate() const;
};

/// Per-pixel result of rasterization, row-major.
struct FragmentBuffer {
  Camera camera;  // the camera the rays came from (crop-adjusted)
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occupied;
  std::vector<std::int64_t> point_index;  // -1 where unoccupied
  std::vector<double> z;                  // depth along the viewing axis, 0 where unoccupied
  std::vector<Eigen::Vector3d> ray_dir;   // unit, world space

  std::size_t pixel_count() const { return occupied.size(); }
  std::size_t occupied_count() const;
  Eigen::Vector3d ray_origin() const { return camera.position(); }
  Eigen::Vector3d view_axis() const { return camera.view_axis(); }
};

/// Unit world-space ray directions for every pixel, row-major.
std::vector<Eigen::Vector3d> ray_grid(const Camera& camera);

/// Reference implementation: tests every point against every pixel ray.
FragmentBuffer rasterize_bruteforce(const PointCloud& cloud, const Camera& camera,
                                    const RasterConfig& cfg);

/// Screen-space bucketed rasterizer; output matches rasterize_bruteforce.
FragmentBuffer rasterize(const PointCloud& cloud, const Camera& camera, const RasterConfig& cfg);

/// Pixel-aligned sub-rectangle; the camera's principal point is shifted.
FragmentBuffer crop(const FragmentBuffer& frag, int left, int top, int width, int height);

/// Hex digest identifying (cloud positions, camera, tau).
std::string fragment_key(const PointCloud& cloud, const Camera& camera, double tau);

void save_fragments(const std::filesystem::path& path, const FragmentBuffer& frag);
FragmentBuffer load_fragments(const std::filesystem::path& path);

/// Loads `dir/<key>.rmck` when present, otherwise rasterizes and stores it.
FragmentBuffer cached_rasterize(const std::filesystem::path& dir, const PointCloud& cloud,
                                const Camera& camera, const RasterConfig& cfg);

}  // namespace radmap
