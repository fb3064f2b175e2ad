// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/transforms.h"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "radmap/errors.h"
#include "radmap/png_io.h"

namespace radmap {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(key, where);
  return obj.at(key);
}

std::filesystem::path resolve_image(const std::filesystem::path& dir, const std::string& file_path) {
  std::filesystem::path p = dir / file_path;
  if (!p.has_extension()) p += ".png";
  return p;
}

}  // namespace

std::vector<CameraFrame> load_transforms_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transforms file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("transforms file " + path.string() + " is not valid JSON: " + e.what());
  }
  const std::string where = path.filename().string();
  const json& angle = require(doc, "camera_angle_x", where);
  const json& frames = require(doc, "frames", where);
  if (!angle.is_number()) throw SchemaError("camera_angle_x", where);
  if (!frames.is_array()) throw SchemaError("frames", where);

  int width = 0, height = 0;
  if (doc.contains("w") && doc.contains("h")) {
    width = doc.at("w").get<int>();
    height = doc.at("h").get<int>();
  } else if (!frames.empty()) {
    const json& fp = require(frames.front(), "file_path", where + " frames[0]");
    const Image first = load_png(resolve_image(path.parent_path(), fp.get<std::string>()));
    width = first.width;
    height = first.height;
  }

  std::vector<CameraFrame> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string fw = where + " frames[" + std::to_string(i) + "]";
    const json& m = require(frames[i], "transform_matrix", fw);
    if (!m.is_array() || m.size() != 4) throw SchemaError("transform_matrix", fw);
    Eigen::Matrix4d pose;
    for (int r = 0; r < 4; ++r) {
      if (!m[r].is_array() || m[r].size() != 4) throw SchemaError("transform_matrix", fw);
      for (int c = 0; c < 4; ++c) pose(r, c) = m[r][c].get<double>();
    }
    CameraFrame frame;
    frame.camera = camera_from_fov(angle.get<double>(), width, height, pose);
    if (frames[i].contains("file_path")) frame.file_path = frames[i].at("file_path").get<std::string>();
    out.push_back(std::move(frame));
  }
  return out;
}

void save_transforms_json(const std::filesystem::path& path, const std::vector<CameraFrame>& frames) {
  json doc;
  if (frames.empty()) {
    doc["camera_angle_x"] = 0.0;
  } else {
    const Camera& c0 = frames.front().camera;
    doc["camera_angle_x"] = 2.0 * std::atan(0.5 * c0.width / c0.fx);
    doc["w"] = c0.width;
    doc["h"] = c0.height;
  }
  doc["frames"] = json::array();
  for (const CameraFrame& f : frames) {
    json m = json::array();
    for (int r = 0; r < 4; ++r) {
      json row = json::array();
      for (int c = 0; c < 4; ++c) row.push_back(f.camera.cam_to_world(r, c));
      m.push_back(row);
    }
    doc["frames"].push_back({{"file_path", f.file_path}, {"transform_matrix", m}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transforms file " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace radmap
