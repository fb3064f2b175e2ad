// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "radmap/errors.h"
#include "radmap/training.h"

namespace radmap {

double psnr(std::span<const double> pred, std::span<const double> gt) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw DimensionError("psnr needs two non-empty images of equal size");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    acc += d * d;
  }
  const double mse = acc / double(pred.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double psnr(const Image& pred, const Image& gt) {
  if (pred.width != gt.width || pred.height != gt.height) {
    throw DimensionError("psnr image extents differ");
  }
  return psnr(std::span<const double>(pred.rgb), std::span<const double>(gt.rgb));
}

namespace {

std::vector<double> grey(const Image& img) {
  std::vector<double> g(std::size_t(img.width) * img.height);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = (img.rgb[3 * i] + img.rgb[3 * i + 1] + img.rgb[3 * i + 2]) / 3.0;
  }
  return g;
}

}  // namespace

double ssim(const Image& pred, const Image& gt) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5, kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  if (pred.width != gt.width || pred.height != gt.height) {
    throw DimensionError("ssim image extents differ");
  }
  if (pred.width < kWin || pred.height < kWin) {
    throw UsageError("ssim needs images of at least 11x11 pixels");
  }
  double kernel[kWin][kWin];
  double norm = 0.0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const double di = i - kWin / 2, dj = j - kWin / 2;
      kernel[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSigma * kSigma));
      norm += kernel[i][j];
    }
  }
  const std::vector<double> a = grey(pred), b = grey(gt);
  const int w = pred.width;
  double total = 0.0;
  std::size_t count = 0;
  for (int y = 0; y + kWin <= pred.height; ++y) {
    for (int x = 0; x + kWin <= w; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double k = kernel[i][j] / norm;
          const std::size_t p = std::size_t(y + i) * w + (x + j);
          ma += k * a[p];
          mb += k * b[p];
          saa += k * a[p] * a[p];
          sbb += k * b[p] * b[p];
          sab += k * a[p] * b[p];
        }
      }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + kC1) * (2 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
      ++count;
    }
  }
  return total / double(count);
}

}  // namespace radmap
