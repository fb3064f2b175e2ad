// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/image.h"

#include <algorithm>
#include <cmath>

#include "radmap/errors.h"

namespace radmap {

Image Image::crop(int left, int top, int w, int h) const {
  if (left < 0 || top < 0 || w <= 0 || h <= 0 || left + w > width || top + h > height) {
    throw UsageError("image crop window outside the image");
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    std::copy_n(rgb.begin() + (std::size_t(top + y) * width + left) * 3, std::size_t(w) * 3,
                out.rgb.begin() + std::size_t(y) * w * 3);
  }
  return out;
}

Image Image::resized(int w, int h) const {
  if (w <= 0 || h <= 0) throw UsageError("image resize to empty extents");
  Image out(w, h);
  const double sx = static_cast<double>(width) / w;
  const double sy = static_cast<double>(height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, height - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, width - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, width - 1);
      const double tx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = at(x0, y0, c) * (1 - tx) + at(x1, y0, c) * tx;
        const double bottom = at(x0, y1, c) * (1 - tx) + at(x1, y1, c) * tx;
        out.at(x, y, c) = top * (1 - ty) + bottom * ty;
      }
    }
  }
  return out;
}

Tensor Image::to_chw() const {
  const std::size_t n = std::size_t(width) * height;
  std::vector<double> v(3 * n);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < 3; ++c) v[c * n + p] = rgb[p * 3 + c];
  }
  return Tensor::from({3, std::size_t(height), std::size_t(width)}, std::move(v));
}

Image Image::from_chw(const Tensor& chw) {
  if (chw.ndim() != 3 || chw.dim(0) != 3) {
    throw DimensionError("expected a [3, H, W] tensor, got " + shape_str(chw.shape()));
  }
  Image out(static_cast<int>(chw.dim(2)), static_cast<int>(chw.dim(1)));
  const std::size_t n = std::size_t(out.width) * out.height;
  auto v = chw.data();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t c = 0; c < 3; ++c) out.rgb[p * 3 + c] = v[c * n + p];
  }
  return out;
}

}  // namespace radmap
