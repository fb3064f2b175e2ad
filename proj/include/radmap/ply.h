// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "radmap/point_cloud.h"

namespace radmap {

enum class PlyEncoding { ascii, binary_little_endian };

/// Reads the `vertex` element of an ASCII or binary little-endian PLY file:
/// x, y, z plus optional red, green, blue (8-bit colours are rescaled to
/// [0,1]). Unknown properties and elements are skipped.
///
/// Throws ParseError (with the header line) on a malformed header,
/// UnsupportedFormatError on big-endian payloads, LengthError on truncated
/// bodies and IoError if the file cannot be opened.
PointCloud load_ply(const std::filesystem::path& path);

/// Writes float32 positions and, when present, uchar colours.
void save_ply(const std::filesystem::path& path, const PointCloud& cloud,
              PlyEncoding encoding = PlyEncoding::binary_little_endian);

}  // namespace radmap
