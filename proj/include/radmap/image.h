// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "radmap/tensor.h"

namespace radmap {

/// RGB image, row-major, origin top-left, interleaved channels (H x W x 3).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h), rgb(std::size_t(w) * h * 3, fill) {}

  double& at(int x, int y, int c) { return rgb[(std::size_t(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return rgb[(std::size_t(y) * width + x) * 3 + c]; }

  Image crop(int left, int top, int w, int h) const;
  // Bilinear resample to new extents, sampling at pixel centres.
  Image resized(int w, int h) const;

  // [3, H, W] tensor without gradient.
  Tensor to_chw() const;
  static Image from_chw(const Tensor& chw);
};

}  // namespace radmap
