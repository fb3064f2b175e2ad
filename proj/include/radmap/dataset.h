// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "radmap/camera.h"
#include "radmap/image.h"
#include "radmap/point_cloud.h"

namespace radmap {

struct View {
  std::string name;
  Camera camera;
  Image image;  // matches camera.width x camera.height
};

/// Posed ground-truth images split into disjoint train and test sets, plus
/// the scene box used to normalise query coordinates.
struct Dataset {
  std::vector<View> train;
  std::vector<View> test;
  Aabb bbox;
  // Radius threshold matched to the cloud's point spacing.
  double tau_hint = 5e-3;
  // Free-form JSON describing how the scene was made.
  std::string description = "{}";

  void validate() const;
};

struct SceneData {
  PointCloud cloud;
  Dataset dataset;
};

/// Directory layout:
///   points.ply, transforms_train.json, transforms_test.json,
///   train/*.png, test/*.png, manifest.json
/// The manifest lists every other file with its SHA-256.
void save_dataset(const std::filesystem::path& dir, const SceneData& scene);

/// Loads and verifies a directory written by save_dataset. A missing
/// manifest raises IoError; a hash mismatch raises FormatError.
SceneData load_dataset(const std::filesystem::path& dir);

}  // namespace radmap
