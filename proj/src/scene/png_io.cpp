// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "radmap/errors.h"

namespace radmap {

Image load_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("PNG file not found: " + path.string());
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + img.message);
  }
  const png_uint_32 original = img.format;
  const bool rgb = (original & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (original & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool linear = (original & PNG_FORMAT_FLAG_LINEAR) != 0;
  const bool colormap = (original & PNG_FORMAT_FLAG_COLORMAP) != 0;
  if (!rgb || alpha || linear || colormap) {
    png_image_free(&img);
    throw UnsupportedFormatError("only 8-bit RGB PNGs are supported: " + path.string());
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + img.message);
  }
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  for (std::size_t i = 0; i < bytes.size(); ++i) out.rgb[i] = bytes[i] / 255.0;
  return out;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  if (image.width <= 0 || image.height <= 0) throw UsageError("cannot save an empty image");
  std::vector<std::uint8_t> bytes(image.rgb.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double v = std::clamp(image.rgb[i], 0.0, 1.0);
    bytes[i] = static_cast<std::uint8_t>(std::round(v * 255.0));
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG: " + std::string(img.message));
  }
  std::vector<std::uint8_t> encoded(size);
  if (!png_image_write_to_memory(&img, encoded.data(), &size, 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG: " + std::string(img.message));
  }
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(encoded.data()), static_cast<std::streamsize>(size));
  if (!out) throw IoError("cannot write PNG file " + path.string());
}

}  // namespace radmap
