// Copyright (c) 2026 The groundworld Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "groundworld/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>
#include <fmt/format.h>
#include <png.h>

namespace groundworld {

namespace {

using V3 = Eigen::Vector3f;

Rgb shade(Rgb base, const V3& normal, const RenderConfig& cfg) {
  const V3 l = cfg.light_dir.cast<float>().normalized();
  const float k = static_cast<float>(cfg.ambient) +
                  static_cast<float>(cfg.diffuse) * std::max(0.0f, normal.dot(l));
  Rgb out;
  for (int c = 0; c < 3; ++c)
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(k * base[c]), 0L, 255L));
  return out;
}

class WorldBuilder {
 public:
  explicit WorldBuilder(const RenderConfig& cfg) : cfg_(cfg) {}

  // Appends `mesh` scaled, yawed and translated. `flip` reverses winding
  // (for surfaces seen from inside).
  void add(const Mesh& mesh, const V3& scale, float yaw, const V3& offset, Rgb color,
           bool flip = false) {
    const Eigen::Matrix3f rot = Eigen::AngleAxisf(yaw, V3::UnitY()).toRotationMatrix();
    const int base = static_cast<int>(world_.vertices.size());
    for (const auto& v : mesh.vertices) world_.vertices.push_back(rot * v.cwiseProduct(scale) + offset);
    for (const auto& t : mesh.triangles) {
      Eigen::Vector3i tri = t.array() + base;
      if (flip) std::swap(tri[1], tri[2]);
      const V3& a = world_.vertices[tri[0]];
      const V3 n = (world_.vertices[tri[1]] - a).cross(world_.vertices[tri[2]] - a).normalized();
      world_.triangles.push_back(tri);
      world_.colors.push_back(shade(color, n, cfg_));
    }
  }

  // Room shell seen from inside; floor, walls and ceiling get their own base.
  void add_room(const RoomLayout& room) {
    const Mesh box = box_mesh(V3::Zero(), V3(room.width, room.height, room.depth));
    const int base = static_cast<int>(world_.vertices.size());
    for (const auto& v : box.vertices) world_.vertices.push_back(v);
    for (const auto& t : box.triangles) {
      Eigen::Vector3i tri = t.array() + base;
      std::swap(tri[1], tri[2]);
      const V3& a = world_.vertices[tri[0]];
      const V3 n = (world_.vertices[tri[1]] - a).cross(world_.vertices[tri[2]] - a).normalized();
      Rgb color = kWallColor;
      if (n.y() > 0.5f) color = kFloorColor;
      if (n.y() < -0.5f) color = kCeilingColor;
      world_.triangles.push_back(tri);
      world_.colors.push_back(shade(color, n, cfg_));
    }
  }

  void add_landmark(const Landmark& l) {
    const V3 pos = l.pose.position.cast<float>();
    const V3 size = l.size.cast<float>();
    const float yaw = static_cast<float>(l.pose.heading);
    const Mesh unit = box_mesh(V3(-0.5f, 0.0f, -0.5f), V3(0.5f, 1.0f, 0.5f));
    const Rgb color = landmark_color(l.kind);
    if (l.kind != LandmarkKind::ReferenceMan) {
      add(unit, size, yaw, pos, color);
      return;
    }
    // Body plus a smaller head on top.
    const float head = 0.22f * size.y();
    const float body = size.y() - head - 0.03f;
    add(unit, V3(size.x(), body, size.z()), yaw, pos, color);
    add(unit, V3(0.6f * size.x(), head, 0.6f * size.x()), yaw, pos + V3(0.0f, body + 0.03f, 0.0f),
        color);
  }

  WorldGeometry take() { return std::move(world_); }

 private:
  const RenderConfig& cfg_;
  WorldGeometry world_;
};

// Screen-space vertex with reciprocal depth.
struct ScreenVertex {
  float x, y, inv_z;
};

float edge(const ScreenVertex& a, const ScreenVertex& b, float px, float py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

void raster_triangle(const ScreenVertex& v0, const ScreenVertex& v1, const ScreenVertex& v2,
                     Rgb color, float min_inv_z, Frame& frame, std::vector<float>& depth) {
  const float area = edge(v0, v1, v2.x, v2.y);
  if (area == 0.0f || !std::isfinite(area)) return;
  const int w = frame.width, h = frame.height;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min({v0.x, v1.x, v2.x}))));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({v0.x, v1.x, v2.x}))));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min({v0.y, v1.y, v2.y}))));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({v0.y, v1.y, v2.y}))));
  const float inv_area = 1.0f / area;
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (int y = y0; y <= y1; ++y) {
    const float py = static_cast<float>(y) + 0.5f;
    for (int x = x0; x <= x1; ++x) {
      const float px = static_cast<float>(x) + 0.5f;
      const float b0 = edge(v1, v2, px, py) * inv_area;
      const float b1 = edge(v2, v0, px, py) * inv_area;
      const float b2 = edge(v0, v1, px, py) * inv_area;
      if (b0 < 0.0f || b1 < 0.0f || b2 < 0.0f) continue;
      const float inv_z = b0 * v0.inv_z + b1 * v1.inv_z + b2 * v2.inv_z;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (inv_z < min_inv_z || inv_z <= depth[i]) continue;
      depth[i] = inv_z;
      frame.data[i] = color[0];
      frame.data[plane + i] = color[1];
      frame.data[2 * plane + i] = color[2];
    }
  }
}

struct CameraBasis {
  V3 eye, right, up, forward;
};

CameraBasis basis(const Pose& pose, const CameraConfig& camera) {
  const float th = static_cast<float>(pose.heading);
  return {V3(static_cast<float>(pose.position.x()), static_cast<float>(camera.eye_height),
             static_cast<float>(pose.position.z())),
          V3(-std::cos(th), 0.0f, std::sin(th)), V3::UnitY(), V3(std::sin(th), 0.0f, std::cos(th))};
}

}  // namespace

std::vector<std::uint8_t> Frame::interleaved() const {
  std::vector<std::uint8_t> out(data.size());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) out[(static_cast<std::size_t>(y) * width + x) * 3 + c] = at(c, y, x);
  return out;
}

void CameraConfig::validate() const {
  if (!(fov_deg > 30.0 && fov_deg < 120.0))
    throw std::invalid_argument(fmt::format("field of view {} outside (30, 120)", fov_deg));
  if (!(near > 0.0 && far > near)) throw std::invalid_argument("clip planes need 0 < near < far");
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame size must be positive");
}

double CameraConfig::focal_px() const {
  return 0.5 * height / std::tan(0.5 * fov_deg * std::numbers::pi / 180.0);
}

Rgb palette(Color c) {
  switch (c) {
    case Color::Red:
      return {230, 25, 25};
    case Color::Green:
      return {25, 210, 25};
    case Color::Blue:
      return {25, 60, 235};
    case Color::Yellow:
      return {235, 225, 25};
    case Color::Black:
      return {15, 15, 15};
  }
  return {0, 0, 0};
}

Rgb landmark_color(LandmarkKind k) {
  switch (k) {
    case LandmarkKind::Door:
      return {120, 72, 40};
    case LandmarkKind::Window:
      return {150, 200, 240};
    case LandmarkKind::Shelf:
      return {85, 60, 110};
    case LandmarkKind::ReferenceMan:
      return {245, 245, 245};
  }
  return {0, 0, 0};
}

WorldGeometry build_world(const SceneSpec& scene, const RenderConfig& cfg) {
  WorldBuilder b(cfg);
  b.add_room(scene.room);
  for (const auto& l : scene.room.landmarks) b.add_landmark(l);

  Mesh meshes[5];
  for (Shape s : kAllShapes) meshes[id(s)] = mesh_for(s, cfg.tessellation);
  const V3 scale = V3::Constant(static_cast<float>(scene.params.object_radius));
  auto add_group = [&](const ObjectGroup& g) {
    for (const auto& p : g.placements)
      b.add(meshes[id(g.phrase.shape)], scale, 0.0f, p.cast<float>(), palette(g.phrase.color));
  };
  for (const auto* opt : scene.options()) {
    add_group(opt->group.objects);
    if (opt->group.anchor) add_group(*opt->group.anchor);
  }
  return b.take();
}

Frame render(const WorldGeometry& world, const Pose& pose, const CameraConfig& camera) {
  camera.validate();
  Frame frame(camera.width, camera.height);
  std::vector<float> depth(static_cast<std::size_t>(camera.width) * camera.height, 0.0f);
  const CameraBasis cb = basis(pose, camera);
  const float f = static_cast<float>(camera.focal_px());
  const float cx = 0.5f * static_cast<float>(camera.width);
  const float cy = 0.5f * static_cast<float>(camera.height);
  const float near = static_cast<float>(camera.near);
  const float min_inv_z = 1.0f / static_cast<float>(camera.far);

  std::vector<V3> cam(world.vertices.size());
  for (std::size_t i = 0; i < cam.size(); ++i) {
    const V3 d = world.vertices[i] - cb.eye;
    cam[i] = V3(d.dot(cb.right), d.dot(cb.up), d.dot(cb.forward));
  }
  auto to_screen = [&](const V3& p) {
    return ScreenVertex{cx + f * p.x() / p.z(), cy - f * p.y() / p.z(), 1.0f / p.z()};
  };

  for (std::size_t t = 0; t < world.triangles.size(); ++t) {
    const auto& tri = world.triangles[t];
    const V3 v[3] = {cam[tri[0]], cam[tri[1]], cam[tri[2]]};
    const int inside = (v[0].z() >= near) + (v[1].z() >= near) + (v[2].z() >= near);
    if (inside == 0) continue;
    const Rgb color = world.colors[t];
    if (inside == 3) {
      raster_triangle(to_screen(v[0]), to_screen(v[1]), to_screen(v[2]), color, min_inv_z, frame, depth);
      continue;
    }
    // Clip against the near plane (one pass of Sutherland-Hodgman).
    V3 poly[4];
    int n = 0;
    for (int i = 0; i < 3; ++i) {
      const V3& a = v[i];
      const V3& b = v[(i + 1) % 3];
      const bool ain = a.z() >= near, bin = b.z() >= near;
      if (ain) poly[n++] = a;
      if (ain != bin) {
        const float s = (near - a.z()) / (b.z() - a.z());
        V3 p = a + s * (b - a);
        p.z() = near;
        poly[n++] = p;
      }
    }
    const ScreenVertex s0 = to_screen(poly[0]);
    for (int i = 1; i + 1 < n; ++i)
      raster_triangle(s0, to_screen(poly[i]), to_screen(poly[i + 1]), color, min_inv_z, frame, depth);
  }
  return frame;
}

Frame render(const SceneSpec& scene, const Pose& pose, const RenderConfig& cfg) {
  return render(build_world(scene, cfg), pose, cfg.camera);
}

bool project(const Vec3& world_point, const Pose& pose, const CameraConfig& camera,
             Eigen::Vector2d& pixel) {
  const CameraBasis cb = basis(pose, camera);
  const Eigen::Vector3d d = world_point - cb.eye.cast<double>();
  const double x = d.dot(cb.right.cast<double>());
  const double y = d.dot(cb.up.cast<double>());
  const double z = d.dot(cb.forward.cast<double>());
  if (z < camera.near) return false;
  const double f = camera.focal_px();
  pixel = {0.5 * camera.width + f * x / z, 0.5 * camera.height - f * y / z};
  return true;
}

void write_png(const std::filesystem::path& path, const Frame& frame) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(frame.width);
  img.height = static_cast<png_uint_32>(frame.height);
  img.format = PNG_FORMAT_RGB;
  const auto rgb = frame.interleaved();
  if (!png_image_write_to_file(&img, path.c_str(), 0, rgb.data(), 0, nullptr))
    throw std::runtime_error(fmt::format("writing {}: {}", path.string(), img.message));
}

Frame read_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw std::runtime_error(fmt::format("reading {}: {}", path.string(), img.message));
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, rgb.data(), 0, nullptr)) {
    png_image_free(&img);
    throw std::runtime_error(fmt::format("decoding {}: {}", path.string(), img.message));
  }
  Frame frame(static_cast<int>(img.width), static_cast<int>(img.height));
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      for (int c = 0; c < 3; ++c) frame.at(c, y, x) = rgb[(static_cast<std::size_t>(y) * frame.width + x) * 3 + c];
  return frame;
}

}  // namespace groundworld
