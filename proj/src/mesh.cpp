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

#include "groundworld/mesh.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

#include <Eigen/Geometry>

namespace groundworld {

namespace {

struct Ring {
  float y;
  float radius;
};

// Surface of revolution about the y axis: a pole at each end joined by
// latitude rings listed top to bottom. A ring level with its pole gives a
// flat cap.
Mesh lathe(float top, const std::vector<Ring>& rings, float bottom, int slices) {
  Mesh m;
  const float two_pi = 2.0f * std::numbers::pi_v<float>;
  m.vertices.emplace_back(0.0f, top, 0.0f);
  for (const auto& r : rings)
    for (int s = 0; s < slices; ++s) {
      const float a = two_pi * static_cast<float>(s) / static_cast<float>(slices);
      m.vertices.emplace_back(r.radius * std::cos(a), r.y, -r.radius * std::sin(a));
    }
  const int south = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0.0f, bottom, 0.0f);

  auto at = [&](int ring, int s) { return 1 + ring * slices + (s % slices); };
  const int n = static_cast<int>(rings.size());
  for (int s = 0; s < slices; ++s) m.triangles.emplace_back(0, at(0, s), at(0, s + 1));
  for (int r = 0; r + 1 < n; ++r)
    for (int s = 0; s < slices; ++s) {
      m.triangles.emplace_back(at(r, s), at(r + 1, s), at(r + 1, s + 1));
      m.triangles.emplace_back(at(r, s), at(r + 1, s + 1), at(r, s + 1));
    }
  for (int s = 0; s < slices; ++s) m.triangles.emplace_back(south, at(n - 1, s + 1), at(n - 1, s));
  return m;
}

Mesh sphere(const Tessellation& t) {
  std::vector<Ring> rings;
  for (int i = 1; i <= t.rings; ++i) {
    const float phi = std::numbers::pi_v<float> * static_cast<float>(i) / static_cast<float>(t.rings + 1);
    rings.push_back({std::cos(phi), std::sin(phi)});
  }
  return lathe(1.0f, rings, -1.0f, t.slices);
}

Mesh capsule(const Tessellation& t) {
  constexpr float radius = 0.6f;
  constexpr float half = 1.0f - radius;  // half-length of the straight part
  const int per_cap = (t.rings + 1) / 2;
  std::vector<Ring> rings;
  for (int i = 1; i <= per_cap; ++i) {
    const float phi = 0.5f * std::numbers::pi_v<float> * static_cast<float>(i) / static_cast<float>(per_cap);
    rings.push_back({half + radius * std::cos(phi), radius * std::sin(phi)});
  }
  for (int i = per_cap; i >= 1; --i) {
    const float phi = 0.5f * std::numbers::pi_v<float> * static_cast<float>(i) / static_cast<float>(per_cap);
    rings.push_back({-half - radius * std::cos(phi), radius * std::sin(phi)});
  }
  return lathe(1.0f, rings, -1.0f, t.slices);
}

Mesh cylinder(const Tessellation& t) {
  return lathe(1.0f, {{1.0f, 1.0f}, {-1.0f, 1.0f}}, -1.0f, t.slices);
}

Mesh prism() {
  // Equilateral triangle in the xz plane, extruded along y.
  Mesh m;
  const float c = std::sqrt(3.0f) / 2.0f;
  const Eigen::Vector3f tri[3] = {{0.0f, 0.0f, -1.0f}, {-c, 0.0f, 0.5f}, {c, 0.0f, 0.5f}};
  for (float y : {1.0f, -1.0f})
    for (const auto& p : tri) m.vertices.emplace_back(p.x(), y, p.z());
  m.triangles = {{0, 1, 2}, {3, 5, 4}};
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    m.triangles.emplace_back(i, i + 3, j + 3);
    m.triangles.emplace_back(i, j + 3, j);
  }
  return m;
}

}  // namespace

Mesh box_mesh(const Eigen::Vector3f& lo, const Eigen::Vector3f& hi) {
  Mesh m;
  for (int k = 0; k < 8; ++k)
    m.vertices.emplace_back(k & 1 ? hi.x() : lo.x(), k & 2 ? hi.y() : lo.y(), k & 4 ? hi.z() : lo.z());
  // Faces -x, +x, -y, +y, -z, +z as quads (a, b, c, d) wound outward.
  const int quads[6][4] = {{0, 4, 6, 2}, {1, 3, 7, 5}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 2, 3, 1}, {4, 5, 7, 6}};
  for (const auto& q : quads) {
    m.triangles.emplace_back(q[0], q[1], q[2]);
    m.triangles.emplace_back(q[0], q[2], q[3]);
  }
  return m;
}

Mesh mesh_for(Shape shape, const Tessellation& tess) {
  if (tess.slices < 3 || tess.rings < 1) throw std::invalid_argument("tessellation too coarse");
  switch (shape) {
    case Shape::Cube:
      return box_mesh(Eigen::Vector3f::Constant(-1.0f), Eigen::Vector3f::Constant(1.0f));
    case Shape::Sphere:
      return sphere(tess);
    case Shape::Cylinder:
      return cylinder(tess);
    case Shape::Prism:
      return prism();
    case Shape::Capsule:
      return capsule(tess);
  }
  throw std::invalid_argument("unknown shape");
}

bool is_watertight(const Mesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
  for (const auto& [edge, n] : directed) {
    if (n != 1) return false;
    const auto twin = directed.find({edge.second, edge.first});
    if (twin == directed.end() || twin->second != 1) return false;
  }
  return !mesh.triangles.empty();
}

double signed_volume(const Mesh& mesh) {
  double v = 0.0;
  for (const auto& t : mesh.triangles) {
    const Eigen::Vector3d a = mesh.vertices[t[0]].cast<double>();
    const Eigen::Vector3d b = mesh.vertices[t[1]].cast<double>();
    const Eigen::Vector3d c = mesh.vertices[t[2]].cast<double>();
    v += a.dot(b.cross(c)) / 6.0;
  }
  return v;
}

}  // namespace groundworld
