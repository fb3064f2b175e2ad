// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/point_cloud.h"

#include <string>

#include "radmap/errors.h"

namespace radmap {

void PointCloud::validate() const {
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite()) {
      throw ValidationError("point " + std::to_string(i) + " has a non-finite position");
    }
  }
  if (!colors.empty()) {
    if (colors.size() != positions.size()) throw ValidationError("colour count differs from point count");
    for (std::size_t i = 0; i < colors.size(); ++i) {
      if ((colors[i].array() < 0.0).any() || (colors[i].array() > 1.0).any()) {
        throw ValidationError("point " + std::to_string(i) + " has a colour outside [0,1]");
      }
    }
  }
}

PointCloud downsample(const PointCloud& cloud, std::size_t factor) {
  if (factor == 0) throw UsageError("downsample factor must be positive");
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); i += factor) {
    out.positions.push_back(cloud.positions[i]);
    if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
  }
  return out;
}

}  // namespace radmap
