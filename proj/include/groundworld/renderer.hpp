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

// Deterministic first-person software rasterizer.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "groundworld/mesh.hpp"
#include "groundworld/scene_spec.hpp"

namespace groundworld {

using Rgb = std::array<std::uint8_t, 3>;

/// Channel-first 8-bit RGB image.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  ///< 3 * height * width, planes R, G, B

  Frame() = default;
  Frame(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(3 * w * h), 0) {}

  std::uint8_t& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  std::uint8_t at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  Rgb pixel(int y, int x) const { return {at(0, y, x), at(1, y, x), at(2, y, x)}; }
  /// Interleaved copy (row-major HWC) for image files.
  std::vector<std::uint8_t> interleaved() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct CameraConfig {
  int width = 128;
  int height = 128;
  double fov_deg = 60.0;  ///< vertical
  double near = 0.1;
  double far = 50.0;
  double eye_height = 1.0;

  /// Throws std::invalid_argument outside (30, 120) degrees or on a bad
  /// clip range.
  void validate() const;
  double focal_px() const;
};

struct RenderConfig {
  CameraConfig camera;
  Tessellation tessellation;
  double ambient = 0.65;
  double diffuse = 0.35;
  Eigen::Vector3d light_dir{0.35, 1.0, 0.25};  ///< toward the light
};

/// Base colors. Object colors stay at least 100 apart (L-infinity) under
/// any shading factor in [ambient, ambient + diffuse].
Rgb palette(Color c);
Rgb landmark_color(LandmarkKind k);
inline constexpr Rgb kWallColor{170, 160, 150};
inline constexpr Rgb kFloorColor{105, 95, 85};
inline constexpr Rgb kCeilingColor{200, 200, 195};

/// Scene triangles in world space with their shaded flat colors. Built once
/// per scene and reused for every pose.
struct WorldGeometry {
  std::vector<Eigen::Vector3f> vertices;
  std::vector<Eigen::Vector3i> triangles;
  std::vector<Rgb> colors;  ///< one per triangle
};

WorldGeometry build_world(const SceneSpec& scene, const RenderConfig& cfg = {});

Frame render(const WorldGeometry& world, const Pose& pose, const CameraConfig& camera);
Frame render(const SceneSpec& scene, const Pose& pose, const RenderConfig& cfg = {});

/// World point to pixel coordinates (x right, y down); false when behind
/// the near plane.
bool project(const Vec3& world_point, const Pose& pose, const CameraConfig& camera,
             Eigen::Vector2d& pixel);

void write_png(const std::filesystem::path& path, const Frame& frame);
Frame read_png(const std::filesystem::path& path);

}  // namespace groundworld
