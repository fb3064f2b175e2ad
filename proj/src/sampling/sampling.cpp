// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/sampling.h"

#include <cmath>
#include <numbers>

#include "radmap/errors.h"

namespace radmap {

void EncodingConfig::validate() const {
  if (coord_freqs < 0 || dir_freqs < 0) throw ValidationError("frequency counts must be non-negative");
  if (!include_raw && (coord_freqs == 0 || dir_freqs == 0)) {
    throw ValidationError("an encoding without the raw value needs at least one frequency");
  }
  if (!((bbox.max - bbox.min).array() > 0.0).all()) {
    throw ValidationError("encoding bounding box must have positive extent");
  }
}

std::size_t EncodingConfig::coord_width() const { return encoded_width(coord_freqs, include_raw); }
std::size_t EncodingConfig::dir_width() const { return encoded_width(dir_freqs, include_raw); }

std::size_t encoded_width(int freqs, bool include_raw) {
  return (include_raw ? 3 : 0) + 6 * static_cast<std::size_t>(freqs);
}

void positional_encode(const Eigen::Vector3d& v, int freqs, bool include_raw, double* out) {
  if (include_raw) {
    for (int c = 0; c < 3; ++c) *out++ = v[c];
  }
  for (int k = 0; k < freqs; ++k) {
    const double w = std::ldexp(std::numbers::pi, k);
    for (int c = 0; c < 3; ++c) out[c] = std::sin(w * v[c]);
    for (int c = 0; c < 3; ++c) out[3 + c] = std::cos(w * v[c]);
    out += 6;
  }
}

std::vector<double> positional_encode(const Eigen::Vector3d& v, int freqs, bool include_raw) {
  std::vector<double> out(encoded_width(freqs, include_raw));
  positional_encode(v, freqs, include_raw, out.data());
  return out;
}

Rectified rectify(const FragmentBuffer& frag) {
  Rectified r;
  const Eigen::Matrix3d rot = frag.camera.rotation();
  const Eigen::Vector3d origin = frag.camera.position();
  for (std::size_t p = 0; p < frag.pixel_count(); ++p) {
    if (!frag.occupied[p]) continue;
    const Eigen::Vector3d d_cam = rot.transpose() * frag.ray_dir[p];
    const double cos_theta = -d_cam.z();
    if (cos_theta <= 1e-6) {
      ++r.dropped;
      continue;
    }
    const Eigen::Vector3d x_cam = (frag.z[p] / cos_theta) * d_cam;
    r.pixel_ids.push_back(p);
    r.coords.push_back(rot * x_cam + origin);
  }
  return r;
}

namespace {

QueryBatch encode(const FragmentBuffer& frag, const EncodingConfig& enc, Rectified&& r) {
  enc.validate();
  QueryBatch b;
  b.width = frag.width;
  b.height = frag.height;
  b.dropped = r.dropped;
  b.pixel_ids = std::move(r.pixel_ids);
  b.coords_world = std::move(r.coords);
  const std::size_t n = b.pixel_ids.size();
  for (std::size_t i = 0; i < n; ++i) b.dirs_world.push_back(frag.ray_dir[b.pixel_ids[i]]);
  if (n == 0) return b;
  const std::size_t cw = enc.coord_width(), dw = enc.dir_width();
  b.coords_encoded = Tensor::zeros({n, cw});
  b.dirs_encoded = Tensor::zeros({n, dw});
  double* cx = b.coords_encoded.data().data();
  double* dx = b.dirs_encoded.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    positional_encode(enc.bbox.normalize(b.coords_world[i]), enc.coord_freqs, enc.include_raw, cx + i * cw);
    positional_encode(b.dirs_world[i], enc.dir_freqs, enc.include_raw, dx + i * dw);
  }
  return b;
}

}  // namespace

QueryBatch build_query_batch(const FragmentBuffer& frag, const EncodingConfig& enc) {
  return encode(frag, enc, rectify(frag));
}

QueryBatch build_raw_query_batch(const FragmentBuffer& frag, const PointCloud& cloud,
                                 const EncodingConfig& enc) {
  Rectified r;
  for (std::size_t p = 0; p < frag.pixel_count(); ++p) {
    if (!frag.occupied[p]) continue;
    const std::int64_t i = frag.point_index[p];
    if (i < 0 || std::size_t(i) >= cloud.size()) {
      throw UsageError("fragment refers to point " + std::to_string(i) + " outside the cloud");
    }
    r.pixel_ids.push_back(p);
    r.coords.push_back(cloud.positions[std::size_t(i)]);
  }
  return encode(frag, enc, std::move(r));
}

}  // namespace radmap
