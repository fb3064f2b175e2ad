// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/errors.h"
#include "radmap/training.h"

namespace radmap {

void AugmentConfig::validate() const {
  if (window < 0) throw ValidationError("crop window must be non-negative");
  if (!(scale_min > 0.0) || !(scale_max >= scale_min)) {
    throw ValidationError("scale range must satisfy 0 < min <= max");
  }
}

AugmentedView augment(const View& view, const FragmentBuffer& frag, const AugmentConfig& cfg,
                      Rng& rng, const PointCloud& cloud, const RasterConfig& raster) {
  cfg.validate();
  AugmentedView out;
  const Image* image = &view.image;
  const FragmentBuffer* source = &frag;
  Image scaled_image;
  FragmentBuffer scaled_frag;
  if (cfg.scale_max > cfg.scale_min || cfg.scale_min != 1.0) {
    out.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
    const Camera cam = view.camera.scaled(out.scale);
    scaled_image = view.image.resized(cam.width, cam.height);
    scaled_frag = rasterize(cloud, cam, raster);
    image = &scaled_image;
    source = &scaled_frag;
  }
  const int w = image->width, h = image->height;
  const int win = cfg.window == 0 ? std::min(w, h) : cfg.window;
  if (cfg.window == 0 && out.scale == 1.0) {
    out.image = *image;
    out.frag = *source;
    return out;
  }
  if (win > w || win > h) {
    throw UsageError("crop window " + std::to_string(win) + " exceeds the image extents " +
                     std::to_string(w) + "x" + std::to_string(h));
  }
  out.left = static_cast<int>(rng.integer(0, w - win));
  out.top = static_cast<int>(rng.integer(0, h - win));
  out.image = image->crop(out.left, out.top, win, win);
  out.frag = crop(*source, out.left, out.top, win, win);
  return out;
}

}  // namespace radmap
