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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groundworld/types.hpp"

namespace groundworld {

/// Thresholds of the geometric predicates, in meters.
struct SpatialParams {
  double horizontal_tolerance = 0.5;
  double contact_epsilon = 0.02;
  double beside_max_gap = 1.0;
  double near_far_threshold = 8.0;  ///< half the room depth
  double between_collinearity_tolerance = 0.3;
  double among_hull_margin = 0.2;
  /// Max centroid height difference for InFrontOf/Behind/Beside.
  double height_band = 0.15;
  /// Half-extent of every object's bounding cube.
  double object_radius = 0.25;
};

/// A set of identical objects (same color and shape).
struct ObjectGroup {
  ObjectPhrase phrase{};
  std::vector<Vec3> placements;

  int count() const noexcept { return static_cast<int>(placements.size()); }
  Vec3 centroid() const;
};

/// Object A, plus Object B when the description carries a preposition.
struct GroupSpec {
  ObjectGroup objects;
  std::optional<ObjectGroup> anchor;
};

enum class DistractorRecipe : std::uint8_t {
  // Determiner environment
  SameDeterminer,
  SameObject,
  // Preposition environment
  SamePreposition,
  SameObjects,
  // Shared by D and P
  AllRandom,
  // Combined environment
  SwappedAttributes,
  AlteredDeterminers,
  ModifiedPreposition,
};

std::string_view name(DistractorRecipe r);
std::optional<DistractorRecipe> parse_recipe(std::string_view token);

enum class LandmarkKind : std::uint8_t { Door, Window, Shelf, ReferenceMan };

std::string_view name(LandmarkKind k);

/// Fixed room furniture. `pose.position` is the center of the footprint on
/// the floor (y is the bottom); `size` is (width along x, height, depth
/// along z) before rotation by the yaw heading.
struct Landmark {
  LandmarkKind kind{};
  Pose pose;
  Vec3 size = Vec3::Ones();

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Axis-aligned room with its floor corner at the origin.
struct RoomLayout {
  int id = 0;
  std::string name = "default";
  double width = 12.0;   ///< x extent
  double depth = 16.0;   ///< z extent
  double height = 4.0;
  double cell = 0.6;     ///< block cell edge; a block is 3x3x3 cells
  std::vector<Vec3> anchors;  ///< block centers on the floor
  std::vector<Landmark> landmarks;
  Pose spawn;

  /// Four quadrant-center anchors in a 12 x 16 x 4 m room.
  static RoomLayout standard();
  /// Same room with two adjacent far anchors; used by the reduced learning task.
  static RoomLayout pair();
  static RoomLayout by_id(int id);

  int anchor_count() const noexcept { return static_cast<int>(anchors.size()); }
  double block_size() const noexcept { return 3.0 * cell; }
  const Landmark& landmark(LandmarkKind kind) const;
  Vec3 reference_man() const { return landmark(LandmarkKind::ReferenceMan).pose.position; }

  friend bool operator==(const RoomLayout&, const RoomLayout&) = default;
};

/// A group at one of the room's locations, with the description it was
/// built from.
struct PlacedGroup {
  GroupSpec group;
  int location = 0;
  Instruction description;
  std::optional<DistractorRecipe> recipe;  ///< empty for the target
};

struct SceneSpec {
  EnvKind kind = EnvKind::D;
  Instruction instruction;
  PlacedGroup target;
  std::vector<PlacedGroup> distractors;
  RoomLayout room;
  std::uint64_t seed = 0;
  SpatialParams params;

  int layout_id() const noexcept { return room.id; }
  Vec3 reference_man() const { return room.reference_man(); }
  /// Target first, then distractors.
  std::vector<const PlacedGroup*> options() const;
};

}  // namespace groundworld
