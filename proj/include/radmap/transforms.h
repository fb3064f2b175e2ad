// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radmap/camera.h"

namespace radmap {

struct CameraFrame {
  Camera camera;
  std::string file_path;  // as written in the JSON, relative to its directory
};

/// Reads a NeRF-Synthetic style transforms file: global camera_angle_x and
/// per-frame 4x4 camera-to-world transform_matrix (camera looks down -z).
/// Image extents come from optional "w"/"h" keys, otherwise from the PNG
/// referenced by the first frame. Focal lengths are
/// fx = fy = 0.5 * width / tan(0.5 * camera_angle_x), principal point at the
/// image centre.
///
/// Missing keys raise SchemaError naming the key.
std::vector<CameraFrame> load_transforms_json(const std::filesystem::path& path);

/// Writes frames in the same layout, including "w" and "h". All cameras
/// must share extents and horizontal field of view.
void save_transforms_json(const std::filesystem::path& path, const std::vector<CameraFrame>& frames);

}  // namespace radmap
