// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/rasterizer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "radmap/errors.h"

namespace radmap {

void RasterConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (tile_size < 1) throw ValidationError("tile size must be at least 1");
  if (threads < 0) throw ValidationError("thread count must be non-negative");
}

std::size_t FragmentBuffer::occupied_count() const {
  return static_cast<std::size_t>(std::count(occupied.begin(), occupied.end(), 1));
}

std::vector<Eigen::Vector3d> ray_grid(const Camera& camera) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(std::size_t(camera.width) * camera.height);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) dirs.push_back(pixel_ray(camera, x, y).dir);
  }
  return dirs;
}

namespace {

FragmentBuffer empty_buffer(const Camera& camera) {
  camera.validate();
  FragmentBuffer f;
  f.camera = camera;
  f.width = camera.width;
  f.height = camera.height;
  const std::size_t n = std::size_t(camera.width) * camera.height;
  f.occupied.assign(n, 0);
  f.point_index.assign(n, -1);
  f.z.assign(n, 0.0);
  f.ray_dir = ray_grid(camera);
  return f;
}

// The exact candidate test shared by both paths.
inline bool within(const Eigen::Vector3d& offset, const Eigen::Vector3d& dir, double tau) {
  const Eigen::Vector3d perp = offset - offset.dot(dir) * dir;
  return perp.norm() < tau;
}

inline void consider(FragmentBuffer& f, std::size_t pixel, std::int64_t index, double depth) {
  if (!f.occupied[pixel] || depth < f.z[pixel] ||
      (depth == f.z[pixel] && index < f.point_index[pixel])) {
    f.occupied[pixel] = 1;
    f.point_index[pixel] = index;
    f.z[pixel] = depth;
  }
}

}  // namespace

FragmentBuffer rasterize_bruteforce(const PointCloud& cloud, const Camera& camera,
                                    const RasterConfig& cfg) {
  cfg.validate();
  FragmentBuffer f = empty_buffer(camera);
  const Eigen::Vector3d origin = camera.position();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double depth = camera.depth(cloud.positions[i]);
    if (!(depth > 0.0)) continue;
    const Eigen::Vector3d offset = cloud.positions[i] - origin;
    for (std::size_t p = 0; p < f.pixel_count(); ++p) {
      if (within(offset, f.ray_dir[p], cfg.tau)) consider(f, p, static_cast<std::int64_t>(i), depth);
    }
  }
  return f;
}

FragmentBuffer rasterize(const PointCloud& cloud, const Camera& camera, const RasterConfig& cfg) {
  cfg.validate();
  FragmentBuffer f = empty_buffer(camera);
  const int w = camera.width, h = camera.height;
  const Eigen::Vector3d origin = camera.position();

  // Largest |(a, b, -1)| over the image plane, reached at a corner.
  double sec_max = 0.0;
  for (double u : {0.0, double(w)}) {
    for (double v : {0.0, double(h)}) {
      const double a = (u - camera.cx) / camera.fx, b = (v - camera.cy) / camera.fy;
      sec_max = std::max(sec_max, std::sqrt(a * a + b * b + 1.0));
    }
  }
  const double focal = std::max(camera.fx, camera.fy);

  const int tiles_x = (w + cfg.tile_size - 1) / cfg.tile_size;
  const int tiles_y = (h + cfg.tile_size - 1) / cfg.tile_size;
  struct Splat {
    std::int64_t index;
    double depth;
    int x0, x1, y0, y1;
  };
  std::vector<Splat> splats;
  std::vector<std::vector<std::uint32_t>> bins(std::size_t(tiles_x) * tiles_y);

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d local = camera.world_to_camera(cloud.positions[i]);
    const double depth = camera.depth(cloud.positions[i]);
    if (!(depth > 0.0)) continue;
    const double u = camera.cx + camera.fx * local.x() / depth - 0.5;
    const double v = camera.cy - camera.fy * local.y() / depth - 0.5;
    const double r = cfg.tau * focal * sec_max / depth + 1.0;
    const double lim = 4.0 * (w + h);
    const int x0 = static_cast<int>(std::max(0.0, std::floor(std::clamp(u - r, -lim, lim))));
    const int x1 = static_cast<int>(std::min(w - 1.0, std::ceil(std::clamp(u + r, -lim, lim))));
    const int y0 = static_cast<int>(std::max(0.0, std::floor(std::clamp(v - r, -lim, lim))));
    const int y1 = static_cast<int>(std::min(h - 1.0, std::ceil(std::clamp(v + r, -lim, lim))));
    if (x0 > x1 || y0 > y1) continue;
    const auto s = static_cast<std::uint32_t>(splats.size());
    splats.push_back({static_cast<std::int64_t>(i), depth, x0, x1, y0, y1});
    for (int ty = y0 / cfg.tile_size; ty <= y1 / cfg.tile_size; ++ty) {
      for (int tx = x0 / cfg.tile_size; tx <= x1 / cfg.tile_size; ++tx) {
        bins[std::size_t(ty) * tiles_x + tx].push_back(s);
      }
    }
  }

  // Tiles write disjoint pixels, so workers need no synchronisation beyond
  // claiming tile numbers.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < bins.size(); t = next++) {
      const int tx = static_cast<int>(t % tiles_x), ty = static_cast<int>(t / tiles_x);
      const int px0 = tx * cfg.tile_size, py0 = ty * cfg.tile_size;
      const int px1 = std::min(w, px0 + cfg.tile_size) - 1;
      const int py1 = std::min(h, py0 + cfg.tile_size) - 1;
      for (std::uint32_t s : bins[t]) {
        const Splat& sp = splats[s];
        const Eigen::Vector3d offset = cloud.positions[sp.index] - origin;
        for (int y = std::max(py0, sp.y0); y <= std::min(py1, sp.y1); ++y) {
          for (int x = std::max(px0, sp.x0); x <= std::min(px1, sp.x1); ++x) {
            const std::size_t p = std::size_t(y) * w + x;
            if (within(offset, f.ray_dir[p], cfg.tau)) consider(f, p, sp.index, sp.depth);
          }
        }
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? unsigned(cfg.threads) : std::thread::hardware_concurrency();
  n_threads = std::clamp<unsigned>(n_threads, 1, static_cast<unsigned>(bins.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return f;
}

FragmentBuffer crop(const FragmentBuffer& frag, int left, int top, int width, int height) {
  if (left < 0 || top < 0 || width < 1 || height < 1 || left + width > frag.width ||
      top + height > frag.height) {
    throw UsageError("crop window exceeds the fragment buffer");
  }
  FragmentBuffer out;
  out.camera = frag.camera;
  out.camera.cx -= left;
  out.camera.cy -= top;
  out.camera.width = width;
  out.camera.height = height;
  out.width = width;
  out.height = height;
  for (int y = top; y < top + height; ++y) {
    const std::size_t row = std::size_t(y) * frag.width;
    for (int x = left; x < left + width; ++x) {
      out.occupied.push_back(frag.occupied[row + x]);
      out.point_index.push_back(frag.point_index[row + x]);
      out.z.push_back(frag.z[row + x]);
      out.ray_dir.push_back(frag.ray_dir[row + x]);
    }
  }
  return out;
}

}  // namespace radmap
