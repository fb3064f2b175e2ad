// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/dataset.h"

#include <fstream>
#include <json.hpp>
#include <set>

#include "radmap/errors.h"
#include "radmap/hashing.h"
#include "radmap/ply.h"
#include "radmap/png_io.h"
#include "radmap/transforms.h"

namespace radmap {

namespace fs = std::filesystem;
using nlohmann::json;

void Dataset::validate() const {
  std::set<std::string> names;
  auto check = [&](const std::vector<View>& views, const char* split) {
    for (const View& v : views) {
      v.camera.validate();
      if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
        throw ValidationError(std::string(split) + " view '" + v.name + "' image is " +
                              std::to_string(v.image.width) + "x" + std::to_string(v.image.height) +
                              " but its camera is " + std::to_string(v.camera.width) + "x" +
                              std::to_string(v.camera.height));
      }
      if (!names.insert(std::string(split) + "/" + v.name).second) {
        throw ValidationError("duplicate view name '" + v.name + "' in " + split);
      }
    }
  };
  check(train, "train");
  check(test, "test");
  if (train.empty()) throw ValidationError("dataset has no training views");
  if (!((bbox.max - bbox.min).array() > 0.0).all()) {
    throw ValidationError("scene bounding box must have positive extent on every axis");
  }
  if (!(tau_hint > 0.0)) throw ValidationError("tau hint must be positive");
}

namespace {

void write_split(const fs::path& dir, const std::string& split, const std::vector<View>& views,
                 std::vector<std::string>& files) {
  fs::create_directories(dir / split);
  std::vector<CameraFrame> frames;
  for (const View& v : views) {
    const std::string rel = split + "/" + v.name;
    save_png(v.image, dir / (rel + ".png"));
    files.push_back(rel + ".png");
    frames.push_back({v.camera, "./" + rel});
  }
  save_transforms_json(dir / ("transforms_" + split + ".json"), frames);
  files.push_back("transforms_" + split + ".json");
}

std::vector<View> read_split(const fs::path& dir, const std::string& split) {
  std::vector<View> views;
  for (const CameraFrame& f : load_transforms_json(dir / ("transforms_" + split + ".json"))) {
    fs::path rel = f.file_path;
    if (!rel.has_extension()) rel += ".png";
    View v;
    v.name = rel.stem().string();
    v.camera = f.camera;
    v.image = load_png(dir / rel);
    views.push_back(std::move(v));
  }
  return views;
}

json vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d read_vec3(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3) {
    throw SchemaError(key, "manifest.json");
  }
  return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

}  // namespace

void save_dataset(const fs::path& dir, const SceneData& scene) {
  scene.dataset.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> files;
  save_ply(dir / "points.ply", scene.cloud);
  files.push_back("points.ply");
  write_split(dir, "train", scene.dataset.train, files);
  write_split(dir, "test", scene.dataset.test, files);

  json manifest;
  manifest["format"] = "radmap-dataset";
  manifest["version"] = 1;
  manifest["bbox_min"] = vec3(scene.dataset.bbox.min);
  manifest["bbox_max"] = vec3(scene.dataset.bbox.max);
  manifest["tau_hint"] = scene.dataset.tau_hint;
  manifest["scene"] = json::parse(scene.dataset.description);
  json entries = json::array();
  for (const std::string& f : files) {
    entries.push_back({{"path", f}, {"sha256", sha256_file(dir / f)}});
  }
  manifest["files"] = entries;

  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + (dir / "manifest.json").string());
}

SceneData load_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("no manifest at " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (!manifest.contains("files") || !manifest["files"].is_array()) {
    throw SchemaError("files", manifest_path.string());
  }
  for (const json& entry : manifest["files"]) {
    if (!entry.contains("path") || !entry.contains("sha256")) {
      throw SchemaError("files[].path/sha256", manifest_path.string());
    }
    const fs::path p = dir / entry["path"].get<std::string>();
    if (!fs::exists(p)) throw IoError("manifest lists missing file " + p.string());
    if (sha256_file(p) != entry["sha256"].get<std::string>()) {
      throw FormatError("hash mismatch for " + p.string());
    }
  }

  SceneData scene;
  scene.cloud = load_ply(dir / "points.ply");
  scene.dataset.train = read_split(dir, "train");
  scene.dataset.test = read_split(dir, "test");
  scene.dataset.bbox.min = read_vec3(manifest, "bbox_min");
  scene.dataset.bbox.max = read_vec3(manifest, "bbox_max");
  if (manifest.contains("tau_hint")) scene.dataset.tau_hint = manifest["tau_hint"].get<double>();
  if (manifest.contains("scene")) scene.dataset.description = manifest["scene"].dump();
  scene.cloud.validate();
  scene.dataset.validate();
  return scene;
}

}  // namespace radmap
