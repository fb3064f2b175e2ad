// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "radmap/image.h"

namespace radmap {

/// 8-bit RGB PNG to [0,1] values (byte / 255). Anything else, including
/// 16-bit, grey, palette or alpha images, raises UnsupportedFormatError.
Image load_png(const std::filesystem::path& path);

/// Quantises to bytes with round-half-away-from-zero after clamping to [0,1].
void save_png(const Image& image, const std::filesystem::path& path);

}  // namespace radmap
