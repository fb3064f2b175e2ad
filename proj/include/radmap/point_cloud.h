// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

namespace radmap {

struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> colors;  // empty, or one RGB in [0,1] per point

  std::size_t size() const { return positions.size(); }
  bool has_colors() const { return !colors.empty(); }
  // Throws ValidationError on non-finite positions or bad colours.
  void validate() const;
};

/// Axis-aligned box.
struct Aabb {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  Aabb inflated(double margin) const {
    return {(min.array() - margin).matrix(), (max.array() + margin).matrix()};
  }
  // Maps the box onto [-1, 1] per axis.
  Eigen::Vector3d normalize(const Eigen::Vector3d& p) const {
    return (2.0 * (p - min).array() / (max - min).array() - 1.0).matrix();
  }
};

/// Keeps every `factor`-th point. Points are sampled i.i.d., so striding is
/// a uniform subsample.
PointCloud downsample(const PointCloud& cloud, std::size_t factor);

}  // namespace radmap
