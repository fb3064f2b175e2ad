// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "oracles.h"
#include "radmap/checkpoint.h"
#include "radmap/dataset.h"
#include "radmap/errors.h"
#include "radmap/ply.h"
#include "radmap/png_io.h"
#include "radmap/random.h"
#include "radmap/synthetic.h"
#include "radmap/transforms.h"

using namespace radmap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("radmap_scene_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double f32(double v) { return double(float(v)); }

}  // namespace

TEST_CASE("load_ply") {
  TempDir dir;
  SUBCASE("single ascii vertex") {
    write_text(dir.path / "a.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                                   "property float z\nend_header\n0 0 0\n");
    const PointCloud c = load_ply(dir.path / "a.ply");
    REQUIRE(c.size() == 1);
    CHECK(c.positions[0] == Eigen::Vector3d::Zero());
    CHECK_FALSE(c.has_colors());
  }
  SUBCASE("8-bit colour rescaled, unknown property skipped") {
    write_text(dir.path / "c.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
                                   "property float z\nproperty float nx\nproperty uchar red\nproperty uchar green\n"
                                   "property uchar blue\nend_header\n1 2 3 9 255 0 0\n");
    const PointCloud c = load_ply(dir.path / "c.ply");
    REQUIRE(c.has_colors());
    CHECK(c.positions[0] == Eigen::Vector3d(1, 2, 3));
    CHECK(c.colors[0] == Eigen::Vector3d(1, 0, 0));
  }
  SUBCASE("malformed header reports its line") {
    write_text(dir.path / "bad.ply", "ply\nformat ascii 1.0\nelement vertex one\nend_header\n");
    try {
      load_ply(dir.path / "bad.ply");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("big-endian payload") {
    write_text(dir.path / "be.ply", "ply\nformat binary_big_endian 1.0\nelement vertex 0\nproperty float x\n"
                                    "property float y\nproperty float z\nend_header\n");
    CHECK_THROWS_AS(load_ply(dir.path / "be.ply"), UnsupportedFormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_ply(dir.path / "nope.ply"), IoError); }
}

TEST_CASE("ply round trip") {
  TempDir dir;
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud c;
    const std::size_t n = trial == 0 ? 1000 : std::size_t(rng.integer(1, 300));
    const bool colored = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      c.positions.emplace_back(rng.normal(), rng.normal(), rng.normal());
      if (colored) c.colors.emplace_back(rng.integer(0, 255) / 255.0, rng.integer(0, 255) / 255.0, rng.integer(0, 255) / 255.0);
    }
    const PlyEncoding enc = trial % 3 == 0 ? PlyEncoding::ascii : PlyEncoding::binary_little_endian;
    save_ply(dir.path / "r.ply", c, enc);
    const PointCloud back = load_ply(dir.path / "r.ply");
    REQUIRE(back.size() == n);
    REQUIRE(back.has_colors() == colored);
    for (std::size_t i = 0; i < n; ++i) {
      for (int k = 0; k < 3; ++k) {
        CHECK(back.positions[i][k] == f32(c.positions[i][k]));
        if (colored) CHECK(back.colors[i][k] == c.colors[i][k]);
      }
    }
  }
}

TEST_CASE("transforms json") {
  TempDir dir;
  SUBCASE("focal from field of view") {
    write_text(dir.path / "t.json",
               R"({"camera_angle_x": 1.5707963267948966, "w": 800, "h": 800,
                   "frames": [{"file_path": "./a", "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}]})");
    const auto frames = load_transforms_json(dir.path / "t.json");
    REQUIRE(frames.size() == 1);
    const Camera& cam = frames[0].camera;
    CHECK(std::abs(cam.fx - 400.0) < 1e-9);
    CHECK(cam.cx == 400.0);
    CHECK(cam.position() == Eigen::Vector3d::Zero());
    CHECK(cam.view_axis() == Eigen::Vector3d(0, 0, -1));
  }
  SUBCASE("missing key named") {
    write_text(dir.path / "t.json", R"({"frames": []})");
    try {
      load_transforms_json(dir.path / "t.json");
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(e.key() == "camera_angle_x");
    }
    write_text(dir.path / "u.json", R"({"camera_angle_x": 1.0, "w": 8, "h": 8, "frames": [{"file_path": "./a"}]})");
    CHECK_THROWS_AS(load_transforms_json(dir.path / "u.json"), SchemaError);
  }
  SUBCASE("three frames echo their poses") {
    Rng rng(12);
    std::vector<CameraFrame> frames;
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector3d eye(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(1, 3));
      frames.push_back({camera_from_fov(0.7, 16, 12, look_at(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ())),
                        "./train/r_" + std::to_string(i)});
    }
    save_transforms_json(dir.path / "t.json", frames);
    const auto back = load_transforms_json(dir.path / "t.json");
    REQUIRE(back.size() == 3);
    const auto j = nlohmann::json::parse(std::ifstream(dir.path / "t.json"));
    for (int i = 0; i < 3; ++i) {
      CHECK(back[i].file_path == frames[i].file_path);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          CHECK(back[i].camera.cam_to_world(r, c) == j["frames"][i]["transform_matrix"][r][c].get<double>());
          CHECK(std::abs(back[i].camera.cam_to_world(r, c) - frames[i].camera.cam_to_world(r, c)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("pixel_ray") {
  SUBCASE("1x1 identity camera looks down -z") {
    Camera cam;
    const Ray r = pixel_ray(cam, 0, 0);
    CHECK((r.dir - Eigen::Vector3d(0, 0, -1)).norm() < 1e-15);
  }
  SUBCASE("principal pixel follows the view axis") {
    const Camera cam = camera_from_fov(0.9, 32, 32, look_at({2, -1, 1.5}, {0, 0, 0}, Eigen::Vector3d::UnitZ()));
    const Ray r = pixel_ray(cam, 15, 15);
    const Eigen::Vector3d local((15.5 - cam.cx) / cam.fx, -(15.5 - cam.cy) / cam.fy, -1.0);
    CHECK((r.dir - (cam.rotation() * local).normalized()).norm() < 1e-12);
  }
  SUBCASE("all pixels face forward and are unit") {
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
      const Camera cam = camera_from_fov(rng.uniform(0.3, 1.5), 20, 14,
                                         look_at({rng.normal(), rng.normal(), rng.normal() + 4}, {0, 0, 0},
                                                 Eigen::Vector3d::UnitZ()));
      for (int y = 0; y < 14; ++y) {
        for (int x = 0; x < 20; ++x) {
          const Ray r = pixel_ray(cam, x, y);
          CHECK(std::abs(r.dir.norm() - 1.0) < 1e-12);
          CHECK((cam.rotation().transpose() * r.dir).z() < 0.0);
        }
      }
    }
  }
}

TEST_CASE("camera validation") {
  Camera cam;
  cam.cam_to_world(0, 0) = 2.0;
  CHECK_THROWS_AS(cam.validate(), ValidationError);
  Camera neg;
  neg.fx = -1;
  CHECK_THROWS_AS(neg.validate(), ValidationError);
}

TEST_CASE("png") {
  TempDir dir;
  SUBCASE("constant 0.5 quantises to 128") {
    save_png(Image(4, 3, 0.5), dir.path / "h.png");
    const Image back = load_png(dir.path / "h.png");
    REQUIRE(back.width == 4);
    REQUIRE(back.height == 3);
    for (double v : back.rgb) CHECK(v == 128.0 / 255.0);
  }
  SUBCASE("one and clamping") {
    Image img(2, 1);
    img.rgb = {1.0, 1.7, -0.3, 0.0, 0.25, 1.0};
    save_png(img, dir.path / "o.png");
    const Image back = load_png(dir.path / "o.png");
    CHECK(back.rgb == std::vector<double>{1, 1, 0, 0, 64.0 / 255.0, 1});
  }
  SUBCASE("random round trip within half a step") {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      Image img(int(rng.integer(1, 20)), int(rng.integer(1, 20)));
      for (double& v : img.rgb) v = rng.uniform();
      save_png(img, dir.path / "r.png");
      const Image back = load_png(dir.path / "r.png");
      for (std::size_t i = 0; i < img.rgb.size(); ++i) CHECK(std::abs(back.rgb[i] - img.rgb[i]) <= 0.5 / 255.0 + 1e-15);
    }
  }
  SUBCASE("not a png") {
    write_text(dir.path / "x.png", "hello");
    CHECK_THROWS_AS(load_png(dir.path / "x.png"), FormatError);
  }
}

TEST_CASE("checkpoint") {
  TempDir dir;
  SUBCASE("empty model is 12 bytes") {
    save_checkpoint(dir.path / "e.rmck", {});
    const auto bytes = read_bytes(dir.path / "e.rmck");
    CHECK(bytes == std::vector<std::uint8_t>{'R', 'M', 'C', 'K', 1, 0, 0, 0, 0, 0, 0, 0});
    CHECK(load_checkpoint(dir.path / "e.rmck").empty());
  }
  SUBCASE("2x2 tensor named w has a fixed layout") {
    const std::vector<NamedTensor> t{{"w", Tensor::from({2, 2}, {1.0, -2.0, 0.5, 0.1})}};
    const auto bytes = encode_checkpoint(t);
    // header 12, name 2+1, ndim 1, dims 16, payload 16
    REQUIRE(bytes.size() == 48);
    CHECK(bytes[12] == 1);
    CHECK(bytes[13] == 0);
    CHECK(bytes[14] == 'w');
    CHECK(bytes[15] == 2);
    CHECK(bytes[16] == 2);
    CHECK(bytes[24] == 2);
    const float one = 1.0f;
    CHECK(std::memcmp(bytes.data() + 32, &one, 4) == 0);
    CHECK(encode_checkpoint(t) == bytes);
    const auto back = decode_checkpoint(bytes);
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == "w");
    CHECK(back[0].tensor.shape() == Shape{2, 2});
    for (int i = 0; i < 4; ++i) CHECK(back[0].tensor.data()[i] == f32(t[0].tensor.data()[i]));
  }
  SUBCASE("random round trips are exact for f32 payloads") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<NamedTensor> ts;
      const int count = int(rng.integer(1, 5));
      for (int k = 0; k < count; ++k) {
        Shape s;
        for (int d = 0, nd = int(rng.integer(0, 3)); d < nd; ++d) s.push_back(std::size_t(rng.integer(1, 6)));
        std::vector<double> v(shape_numel(s));
        for (double& x : v) x = f32(rng.normal());
        ts.push_back({"t" + std::to_string(k), Tensor::from(s, v)});
      }
      save_checkpoint(dir.path / "r.rmck", ts);
      const auto back = load_checkpoint(dir.path / "r.rmck");
      REQUIRE(back.size() == ts.size());
      for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(back[k].name == ts[k].name);
        CHECK(back[k].tensor.shape() == ts[k].tensor.shape());
        for (std::size_t i = 0; i < ts[k].tensor.numel(); ++i) CHECK(back[k].tensor.data()[i] == ts[k].tensor.data()[i]);
      }
    }
  }
  SUBCASE("corruption") {
    auto bytes = encode_checkpoint({{"w", Tensor::full({3}, 1.0)}});
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
    bad = bytes;
    bad[4] = 2;
    CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
    bad = bytes;
    bad.resize(bad.size() - 1);
    CHECK_THROWS_AS(decode_checkpoint(bad), LengthError);
  }
  SUBCASE("config text survives") {
    const std::string text = R"({"seed": 3, "name": "café"})";
    CHECK(tensor_to_string(string_to_tensor(text)) == text);
  }
}

TEST_CASE("synthetic scene") {
  SyntheticScene spec;
  spec.point_count = 2000;
  spec.width = 24;
  spec.height = 20;
  spec.test_views = 2;

  SUBCASE("noiseless sphere samples lie on the surface") {
    spec.noise_sigma = 0.0;
    const SceneData s = generate_scene(spec, 4);
    REQUIRE(s.cloud.size() == 2000);
    for (const auto& p : s.cloud.positions) CHECK(std::abs(p.norm() - spec.size) < 1e-9);
  }
  SUBCASE("constant plane colour covers every plane pixel") {
    spec.primitive = Primitive::plane;
    spec.radiance.kind = RadianceSpec::Kind::constant;
    const SceneData s = generate_scene(spec, 3);
    std::size_t covered = 0;
    for (const View& v : s.dataset.train) {
      for (int y = 0; y < v.image.height; ++y) {
        for (int x = 0; x < v.image.width; ++x) {
          if (!intersect(spec, pixel_ray(v.camera, x, y))) continue;
          ++covered;
          for (int c = 0; c < 3; ++c) CHECK(v.image.at(x, y, c) == spec.radiance.color_a[c]);
        }
      }
    }
    CHECK(covered > 0);
  }
  SUBCASE("checker pixel matches radiance at the analytic hit") {
    const SceneData s = generate_scene(spec, 3);
    Rng rng(16);
    std::size_t hits = 0;
    for (const View& v : s.dataset.train) {
      for (int k = 0; k < 50; ++k) {
        const int x = int(rng.integer(0, v.camera.width - 1)), y = int(rng.integer(0, v.camera.height - 1));
        const Eigen::Vector3d o = v.camera.position();
        const Eigen::Vector3d local((x + 0.5 - v.camera.cx) / v.camera.fx, -(y + 0.5 - v.camera.cy) / v.camera.fy, -1);
        const Eigen::Vector3d d = (v.camera.rotation() * local).normalized();
        const double t = oracle::ray_sphere(o, d, Eigen::Vector3d::Zero(), spec.size);
        const Eigen::Vector3d want = std::isfinite(t) ? spec.radiance.evaluate(o + t * d, d) : spec.background;
        hits += std::isfinite(t);
        for (int c = 0; c < 3; ++c) CHECK(std::abs(v.image.at(x, y, c) - want[c]) < 1e-12);
      }
    }
    CHECK(hits > 0);
  }
  SUBCASE("ground truth ignores point count and noise") {
    SyntheticScene other = spec;
    other.point_count = 17;
    other.noise_sigma = 0.05;
    const SceneData a = generate_scene(spec, 4), b = generate_scene(other, 4);
    REQUIRE(a.dataset.train.size() == b.dataset.train.size());
    for (std::size_t i = 0; i < a.dataset.train.size(); ++i) CHECK(a.dataset.train[i].image.rgb == b.dataset.train[i].image.rgb);
    for (std::size_t i = 0; i < a.dataset.test.size(); ++i) CHECK(a.dataset.test[i].image.rgb == b.dataset.test[i].image.rgb);
  }
  SUBCASE("cameras valid, splits disjoint, seeds reproducible") {
    for (Primitive p : {Primitive::sphere, Primitive::plane, Primitive::textured_cube}) {
      spec.primitive = p;
      const SceneData s = generate_scene(spec, 6);
      CHECK(s.dataset.train.size() == 4);
      CHECK(s.dataset.test.size() == 2);
      for (const auto* split : {&s.dataset.train, &s.dataset.test}) {
        for (const View& v : *split) {
          CHECK_NOTHROW(v.camera.validate());
          CHECK(v.image.width == v.camera.width);
          for (const View& w : s.dataset.train) {
            if (split == &s.dataset.test) CHECK(v.name + "test" != w.name + "train");
          }
        }
      }
      CHECK_NOTHROW(s.dataset.validate());
      const SceneData again = generate_scene(spec, 6);
      CHECK(again.cloud.positions == s.cloud.positions);
    }
  }
  SUBCASE("single view keeps one train view") {
    const SceneData s = generate_scene(spec, 1);
    CHECK(s.dataset.train.size() == 1);
    CHECK(s.dataset.test.empty());
  }
  SUBCASE("bbox is the primitive box inflated by three sigma") {
    spec.noise_sigma = 0.01;
    const Aabb b = scene_bbox(spec);
    CHECK(std::abs(b.max.x() - 1.03) < 1e-12);
    CHECK(std::abs(b.min.z() + 1.03) < 1e-12);
  }
  SUBCASE("invalid specs") {
    spec.point_count = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.point_count = 1;
    spec.noise_sigma = -1;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    CHECK_THROWS_AS(parse_primitive("torus"), ValidationError);
  }
  SUBCASE("radiance stays in range") {
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
      const Eigen::Vector3d c = spec.radiance.evaluate({rng.normal(), rng.normal(), rng.normal()}, Eigen::Vector3d::UnitX());
      CHECK(c.minCoeff() >= 0.0);
      CHECK(c.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("dataset directory") {
  TempDir dir;
  SyntheticScene spec;
  spec.point_count = 500;
  spec.width = 16;
  spec.height = 16;
  spec.test_views = 1;
  const SceneData s = generate_scene(spec, 3);
  save_dataset(dir.path / "d", s);
  const SceneData back = load_dataset(dir.path / "d");
  CHECK(back.cloud.size() == 500);
  REQUIRE(back.dataset.train.size() == 2);
  REQUIRE(back.dataset.test.size() == 1);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.dataset.train[i].name == s.dataset.train[i].name);
    for (std::size_t k = 0; k < s.dataset.train[i].image.rgb.size(); ++k) {
      CHECK(std::abs(back.dataset.train[i].image.rgb[k] - s.dataset.train[i].image.rgb[k]) <= 0.5 / 255 + 1e-15);
    }
  }
  CHECK(std::abs(back.dataset.tau_hint - s.dataset.tau_hint) < 1e-12);
  CHECK((back.dataset.bbox.max - s.dataset.bbox.max).norm() < 1e-12);

  SUBCASE("tampered file fails its hash") {
    std::ofstream(dir.path / "d" / "points.ply", std::ios::app) << "x";
    CHECK_THROWS_AS(load_dataset(dir.path / "d"), FormatError);
  }
  SUBCASE("missing manifest") {
    fs::remove(dir.path / "d" / "manifest.json");
    CHECK_THROWS_AS(load_dataset(dir.path / "d"), IoError);
  }
}

TEST_CASE("downsample keeps every kth point") {
  PointCloud c;
  for (int i = 0; i < 25; ++i) c.positions.emplace_back(i, 0, 0);
  const PointCloud d = downsample(c, 10);
  REQUIRE(d.size() == 3);
  CHECK(d.positions[1].x() == 10);
  CHECK(downsample(c, 1).size() == 25);
}
