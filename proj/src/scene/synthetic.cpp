// Copyright 2026 The radmap Authors
// SPDX-License-Identifier: Apache-2.0

#include "radmap/synthetic.h"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "radmap/errors.h"
#include "radmap/random.h"

namespace radmap {

std::string to_string(Primitive p) {
  switch (p) {
    case Primitive::sphere: return "sphere";
    case Primitive::plane: return "plane";
    case Primitive::textured_cube: return "textured-cube";
  }
  return "unknown";
}

Primitive parse_primitive(const std::string& name) {
  if (name == "sphere") return Primitive::sphere;
  if (name == "plane") return Primitive::plane;
  if (name == "textured-cube" || name == "cube") return Primitive::textured_cube;
  throw ValidationError("unknown primitive '" + name + "' (sphere, plane, textured-cube)");
}

Eigen::Vector3d RadianceSpec::evaluate(const Eigen::Vector3d& point, const Eigen::Vector3d&) const {
  if (kind == Kind::constant) return color_a;
  const long long cells = static_cast<long long>(std::floor(point.x() / cell_size)) +
                          static_cast<long long>(std::floor(point.y() / cell_size)) +
                          static_cast<long long>(std::floor(point.z() / cell_size));
  return (cells % 2 == 0) ? color_a : color_b;
}

void SyntheticScene::validate() const {
  if (point_count == 0) throw ValidationError("point count must be positive");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise sigma must be non-negative");
  if (!(size > 0.0)) throw ValidationError("primitive size must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("image extents must be positive");
  if (!(camera_angle_x > 0.0 && camera_angle_x < std::numbers::pi)) {
    throw ValidationError("camera_angle_x must lie in (0, pi)");
  }
  if (!(camera_distance > size * std::sqrt(3.0))) {
    throw ValidationError("cameras must orbit outside the primitive");
  }
  for (const auto* c : {&radiance.color_a, &radiance.color_b, &background}) {
    if ((c->array() < 0.0).any() || (c->array() > 1.0).any()) {
      throw ValidationError("colours must lie in [0,1]");
    }
  }
  if (!(radiance.cell_size > 0.0)) throw ValidationError("checker cell size must be positive");
}

std::optional<SurfaceHit> intersect(const SyntheticScene& scene, const Ray& ray) {
  const double s = scene.size;
  switch (scene.primitive) {
    case Primitive::sphere: {
      const double b = ray.origin.dot(ray.dir);
      const double c = ray.origin.squaredNorm() - s * s;
      const double disc = b * b - c;
      if (disc < 0.0) return std::nullopt;
      const double root = std::sqrt(disc);
      double t = -b - root;
      if (t <= 0.0) t = -b + root;
      if (t <= 0.0) return std::nullopt;
      return SurfaceHit{t, ray.origin + t * ray.dir};
    }
    case Primitive::plane: {
      if (ray.dir.z() == 0.0) return std::nullopt;
      const double t = -ray.origin.z() / ray.dir.z();
      if (t <= 0.0) return std::nullopt;
      Eigen::Vector3d p = ray.origin + t * ray.dir;
      if (std::abs(p.x()) > s || std::abs(p.y()) > s) return std::nullopt;
      p.z() = 0.0;
      return SurfaceHit{t, p};
    }
    case Primitive::textured_cube: {
      double t0 = -std::numeric_limits<double>::infinity();
      double t1 = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        if (ray.dir[a] == 0.0) {
          if (std::abs(ray.origin[a]) > s) return std::nullopt;
          continue;
        }
        double ta = (-s - ray.origin[a]) / ray.dir[a];
        double tb = (s - ray.origin[a]) / ray.dir[a];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
      }
      if (t0 > t1 || t1 <= 0.0) return std::nullopt;
      const double t = t0 > 0.0 ? t0 : t1;
      return SurfaceHit{t, ray.origin + t * ray.dir};
    }
  }
  return std::nullopt;
}

double surface_area(const SyntheticScene& scene) {
  const double s = scene.size;
  switch (scene.primitive) {
    case Primitive::sphere: return 4.0 * std::numbers::pi * s * s;
    case Primitive::plane: return 4.0 * s * s;
    case Primitive::textured_cube: return 24.0 * s * s;
  }
  return 0.0;
}

Aabb primitive_bounds(const SyntheticScene& scene) {
  const double s = scene.size;
  Aabb box{Eigen::Vector3d::Constant(-s), Eigen::Vector3d::Constant(s)};
  if (scene.primitive == Primitive::plane) {
    box.min.z() = 0.0;
    box.max.z() = 0.0;
  }
  return box;
}

Aabb scene_bbox(const SyntheticScene& scene) {
  Aabb box = primitive_bounds(scene).inflated(3.0 * scene.noise_sigma);
  // A flat primitive without noise would give a zero-width axis.
  for (int a = 0; a < 3; ++a) {
    if (box.max[a] - box.min[a] < 1e-6) {
      box.min[a] -= 0.01 * scene.size;
      box.max[a] += 0.01 * scene.size;
    }
  }
  return box;
}

double spacing_tau(double area, std::size_t point_count) {
  if (point_count == 0) throw UsageError("spacing_tau: empty cloud");
  return std::sqrt(area / static_cast<double>(point_count));
}

std::vector<Camera> orbit_cameras(const SyntheticScene& scene, std::size_t n_views) {
  const double deg = std::numbers::pi / 180.0;
  const bool plane = scene.primitive == Primitive::plane;
  const double el_lo = (plane ? 25.0 : -20.0) * deg;
  const double el_hi = (plane ? 75.0 : 60.0) * deg;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Rng rng(scene.seed, 0xCA3E);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Camera> cams;
  for (std::size_t i = 0; i < n_views; ++i) {
    const double t = (i + 0.5) / static_cast<double>(n_views);
    const double el = el_lo + t * (el_hi - el_lo);
    const double az = phase + golden * static_cast<double>(i);
    const Eigen::Vector3d eye = scene.camera_distance *
                                Eigen::Vector3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                                std::sin(el));
    const Eigen::Matrix4d pose = look_at(eye, Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ());
    cams.push_back(camera_from_fov(scene.camera_angle_x, scene.width, scene.height, pose));
  }
  return cams;
}

Image render_ground_truth(const SyntheticScene& scene, const Camera& camera) {
  Image img(camera.width, camera.height);
  for (int y = 0; y < camera.height; ++y) {
    for (int x = 0; x < camera.width; ++x) {
      const Ray ray = pixel_ray(camera, x, y);
      const auto hit = intersect(scene, ray);
      const Eigen::Vector3d c = hit ? scene.radiance.evaluate(hit->point, ray.dir) : scene.background;
      for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
    }
  }
  return img;
}

namespace {

Eigen::Vector3d sample_surface(const SyntheticScene& scene, Rng& rng) {
  const double s = scene.size;
  switch (scene.primitive) {
    case Primitive::sphere: {
      Eigen::Vector3d v;
      do {
        v = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      } while (v.squaredNorm() < 1e-12);
      return s * v.normalized();
    }
    case Primitive::plane:
      return {rng.uniform(-s, s), rng.uniform(-s, s), 0.0};
    case Primitive::textured_cube: {
      const auto face = rng.integer(0, 5);
      const int axis = static_cast<int>(face / 2);
      Eigen::Vector3d p(rng.uniform(-s, s), rng.uniform(-s, s), rng.uniform(-s, s));
      p[axis] = (face % 2 == 0) ? -s : s;
      return p;
    }
  }
  return Eigen::Vector3d::Zero();
}

}  // namespace

std::string describe(const SyntheticScene& scene) {
  nlohmann::json j;
  j["primitive"] = to_string(scene.primitive);
  j["radiance"] = scene.radiance.kind == RadianceSpec::Kind::checker ? "checker" : "constant";
  j["color_a"] = {scene.radiance.color_a.x(), scene.radiance.color_a.y(), scene.radiance.color_a.z()};
  j["color_b"] = {scene.radiance.color_b.x(), scene.radiance.color_b.y(), scene.radiance.color_b.z()};
  j["cell_size"] = scene.radiance.cell_size;
  j["point_count"] = scene.point_count;
  j["noise_sigma"] = scene.noise_sigma;
  j["seed"] = scene.seed;
  j["size"] = scene.size;
  j["width"] = scene.width;
  j["height"] = scene.height;
  j["camera_angle_x"] = scene.camera_angle_x;
  j["camera_distance"] = scene.camera_distance;
  j["background"] = {scene.background.x(), scene.background.y(), scene.background.z()};
  return j.dump();
}

SceneData generate_scene(const SyntheticScene& scene, std::size_t n_views) {
  scene.validate();
  if (n_views == 0) throw ValidationError("view count must be positive");

  SceneData out;
  Rng rng(scene.seed, 0x9017);
  out.cloud.positions.reserve(scene.point_count);
  out.cloud.colors.reserve(scene.point_count);
  for (std::size_t i = 0; i < scene.point_count; ++i) {
    const Eigen::Vector3d surface = sample_surface(scene, rng);
    Eigen::Vector3d p = surface;
    if (scene.noise_sigma > 0.0) {
      for (int k = 0; k < 3; ++k) p[k] += rng.normal(0.0, scene.noise_sigma);
    }
    out.cloud.positions.push_back(p);
    out.cloud.colors.push_back(scene.radiance.evaluate(surface, -surface.normalized()));
  }

  const auto cams = orbit_cameras(scene, n_views);
  const std::size_t n_test = std::min(scene.test_views, n_views - 1);
  std::vector<bool> is_test(n_views, false);
  for (std::size_t k = 0; k < n_test; ++k) {
    is_test[static_cast<std::size_t>((k + 0.5) * n_views / n_test)] = true;
  }
  std::size_t n_train_named = 0, n_test_named = 0;
  for (std::size_t i = 0; i < n_views; ++i) {
    View v;
    v.camera = cams[i];
    v.image = render_ground_truth(scene, cams[i]);
    char name[32];
    if (is_test[i]) {
      std::snprintf(name, sizeof name, "r_%03zu", n_test_named++);
      v.name = name;
      out.dataset.test.push_back(std::move(v));
    } else {
      std::snprintf(name, sizeof name, "r_%03zu", n_train_named++);
      v.name = name;
      out.dataset.train.push_back(std::move(v));
    }
  }
  out.dataset.bbox = scene_bbox(scene);
  out.dataset.tau_hint = spacing_tau(surface_area(scene), scene.point_count);
  out.dataset.description = describe(scene);
  return out;
}

}  // namespace radmap
