// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "radmap/point_cloud.h"
#include "radmap/rasterizer.h"
#include "radmap/tensor.h"

namespace radmap {

struct EncodingConfig {
  int coord_freqs = 10;
  int dir_freqs = 4;
  bool include_raw = true;
  Aabb bbox{Eigen::Vector3d::Constant(-1.0), Eigen::Vector3d::Constant(1.0)};

  void validate() const;
  std::size_t coord_width() const;
  std::size_t dir_width() const;
};

// 3 + 6F with the raw value, 6F without.
std::size_t encoded_width(int freqs, bool include_raw);

/// Writes encoded_width(freqs, include_raw) values: the raw vector, then per
/// frequency k the sines sin(2^k pi v) of all three components followed by
/// the cosines.
void positional_encode(const Eigen::Vector3d& v, int freqs, bool include_raw, double* out);
std::vector<double> positional_encode(const Eigen::Vector3d& v, int freqs, bool include_raw);

struct Rectified {
  std::vector<std::size_t> pixel_ids;
  std::vector<Eigen::Vector3d> coords;
  std::size_t dropped = 0;  // grazing rays skipped
};

/// Moves each occupied pixel's query onto its ray at the stored depth:
/// x = o + (z / cos theta) d with cos theta the viewing-axis component of d.
Rectified rectify(const FragmentBuffer& frag);

/// Query inputs for the occupied pixels of one view, row-major.
struct QueryBatch {
  int width = 0;
  int height = 0;
  std::vector<std::size_t> pixel_ids;
  std::vector<Eigen::Vector3d> coords_world;
  std::vector<Eigen::Vector3d> dirs_world;
  Tensor coords_encoded;  // [N, coord_width]; undefined when N = 0
  Tensor dirs_encoded;    // [N, dir_width]
  std::size_t dropped = 0;

  std::size_t size() const { return pixel_ids.size(); }
};

QueryBatch build_query_batch(const FragmentBuffer& frag, const EncodingConfig& enc);

/// Baseline without rectification: queries use the winning point's own
/// position instead of the point on the pixel ray.
QueryBatch build_raw_query_batch(const FragmentBuffer& frag, const PointCloud& cloud,
                                 const EncodingConfig& enc);

}  // namespace radmap
