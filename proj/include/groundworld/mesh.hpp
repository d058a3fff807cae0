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

#pragma once

#include <vector>

#include <Eigen/Core>

#include "groundworld/types.hpp"

namespace groundworld {

/// Indexed triangle mesh. Triangles wind counter-clockwise seen from
/// outside.
struct Mesh {
  std::vector<Eigen::Vector3f> vertices;
  std::vector<Eigen::Vector3i> triangles;

  int triangle_count() const noexcept { return static_cast<int>(triangles.size()); }
};

/// Angular resolution of the curved primitives. `rings` counts the
/// latitude circles strictly between the poles.
struct Tessellation {
  int slices = 12;
  int rings = 8;
};

/// Primitive fitted to the cube [-1, 1]^3:
///  - Cube: 12 triangles;
///  - Sphere: 2 * slices * rings;
///  - Cylinder: 4 * slices;
///  - Prism (triangular): 8;
///  - Capsule: 2 * slices * rings (rings rounded up to even).
Mesh mesh_for(Shape shape, const Tessellation& tess = {});

/// Axis-aligned box spanning [lo, hi].
Mesh box_mesh(const Eigen::Vector3f& lo, const Eigen::Vector3f& hi);

/// Every undirected edge is shared by exactly two triangles and every
/// directed edge appears once (closed, consistently oriented).
bool is_watertight(const Mesh& mesh);

/// Sum of signed tetrahedron volumes; positive for outward winding.
double signed_volume(const Mesh& mesh);

}  // namespace groundworld
