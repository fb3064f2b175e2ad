// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstring>
#include <vector>

#include "radmap/checkpoint.h"
#include "radmap/errors.h"
#include "radmap/hashing.h"
#include "radmap/rasterizer.h"

namespace radmap {

namespace fs = std::filesystem;

std::string fragment_key(const PointCloud& cloud, const Camera& camera, double tau) {
  std::vector<double> values;
  values.reserve(cloud.size() * 3 + 24);
  for (const auto& p : cloud.positions) values.insert(values.end(), {p.x(), p.y(), p.z()});
  values.insert(values.end(), {camera.fx, camera.fy, camera.cx, camera.cy, double(camera.width),
                               double(camera.height), tau});
  for (int i = 0; i < 16; ++i) values.push_back(camera.cam_to_world(i / 4, i % 4));
  return sha256_hex(values);
}

void save_fragments(const fs::path& path, const FragmentBuffer& frag) {
  const std::size_t n = frag.pixel_count();
  const Shape grid{std::size_t(frag.height), std::size_t(frag.width)};
  Tensor occupied = Tensor::zeros(grid), index = Tensor::zeros(grid), z = Tensor::zeros(grid);
  Tensor dirs = Tensor::zeros({grid[0], grid[1], 3});
  for (std::size_t p = 0; p < n; ++p) {
    if (frag.point_index[p] >= (std::int64_t{1} << 24)) {
      throw UsageError("fragment cache stores indices as f32 and supports at most 2^24 points");
    }
    occupied.data()[p] = frag.occupied[p];
    index.data()[p] = double(frag.point_index[p]);
    z.data()[p] = frag.z[p];
    for (int k = 0; k < 3; ++k) dirs.data()[p * 3 + k] = frag.ray_dir[p][k];
  }
  const Camera& c = frag.camera;
  Tensor intrinsics = Tensor::from({6}, {c.fx, c.fy, c.cx, c.cy, double(c.width), double(c.height)});
  std::vector<double> pose(16);
  for (int i = 0; i < 16; ++i) pose[i] = c.cam_to_world(i / 4, i % 4);
  save_checkpoint(path, {{"occupied", occupied},
                         {"index", index},
                         {"z", z},
                         {"ray_dir", dirs},
                         {"camera.intrinsics", intrinsics},
                         {"camera.pose", Tensor::from({4, 4}, pose)}});
}

FragmentBuffer load_fragments(const fs::path& path) {
  const auto tensors = load_checkpoint(path);
  auto get = [&](const std::string& name) {
    const NamedTensor* t = find_tensor(tensors, name);
    if (!t) throw FormatError(path.string() + ": fragment cache lacks tensor '" + name + "'");
    return t->tensor;
  };
  const Tensor intr = get("camera.intrinsics"), pose = get("camera.pose");
  if (intr.numel() != 6 || pose.numel() != 16) throw FormatError(path.string() + ": bad camera tensors");
  FragmentBuffer f;
  Camera& c = f.camera;
  c.fx = intr.data()[0];
  c.fy = intr.data()[1];
  c.cx = intr.data()[2];
  c.cy = intr.data()[3];
  c.width = int(intr.data()[4]);
  c.height = int(intr.data()[5]);
  for (int i = 0; i < 16; ++i) c.cam_to_world(i / 4, i % 4) = pose.data()[i];
  f.width = c.width;
  f.height = c.height;
  const std::size_t n = std::size_t(f.width) * f.height;
  const Tensor occ = get("occupied"), idx = get("index"), z = get("z"), dirs = get("ray_dir");
  if (occ.numel() != n || idx.numel() != n || z.numel() != n || dirs.numel() != 3 * n) {
    throw FormatError(path.string() + ": fragment tensors do not match the camera extents");
  }
  for (std::size_t p = 0; p < n; ++p) {
    f.occupied.push_back(occ.data()[p] != 0.0);
    f.point_index.push_back(static_cast<std::int64_t>(idx.data()[p]));
    f.z.push_back(z.data()[p]);
    f.ray_dir.push_back(Eigen::Vector3d(dirs.data()[3 * p], dirs.data()[3 * p + 1], dirs.data()[3 * p + 2]));
  }
  return f;
}

FragmentBuffer cached_rasterize(const fs::path& dir, const PointCloud& cloud, const Camera& camera,
                                const RasterConfig& cfg) {
  const fs::path path = dir / (fragment_key(cloud, camera, cfg.tau) + ".rmck");
  if (fs::exists(path)) {
    // The file keeps winners only to f32; depths and rays are rebuilt in
    // double from the inputs the key was made from.
    const FragmentBuffer stored = load_fragments(path);
    FragmentBuffer f;
    f.camera = camera;
    f.width = camera.width;
    f.height = camera.height;
    if (stored.width != f.width || stored.height != f.height) {
      throw FormatError(path.string() + ": cached fragments have the wrong extents");
    }
    f.occupied = stored.occupied;
    f.point_index = stored.point_index;
    f.ray_dir = ray_grid(camera);
    f.z.assign(f.occupied.size(), 0.0);
    for (std::size_t p = 0; p < f.occupied.size(); ++p) {
      if (!f.occupied[p]) continue;
      const std::int64_t i = f.point_index[p];
      if (i < 0 || std::size_t(i) >= cloud.size()) {
        throw FormatError(path.string() + ": cached point index out of range");
      }
      f.z[p] = camera.depth(cloud.positions[std::size_t(i)]);
    }
    return f;
  }
  FragmentBuffer f = rasterize(cloud, camera, cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create fragment cache " + dir.string() + ": " + ec.message());
  save_fragments(path, f);
  return f;
}

}  // namespace radmap
