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

// Procedural scene construction: the constructive counterpart of the
// semantic oracles.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "groundworld/grammar.hpp"
#include "groundworld/scene_spec.hpp"
#include "groundworld/semantics.hpp"

namespace groundworld {

struct SceneConfig {
  RoomLayout room = RoomLayout::standard();
  SpatialParams params;
  /// Attribute pool for random distractor slots; `kind` is overridden by the
  /// instruction's kind.
  GrammarConfig vocab;
  int retry_budget = 200;
  double jitter = 0.05;  ///< per-axis uniform noise added to cell centers
};

/// Center of cell (i, j, k) of the 3x3x3 block standing on `anchor`.
/// i runs along x, j is the layer (0 on the floor), k runs along z.
Vec3 cell_center(const Vec3& anchor, double cell, int i, int j, int k);

/// True when every placement lies inside the block footprint and height.
bool inside_block(const std::vector<Vec3>& placements, const Vec3& anchor, double cell);

/// True when every pair of centers is farther apart than two radii.
bool non_overlapping(const std::vector<Vec3>& placements, double radius);

struct RelationPlacement {
  std::vector<Vec3> a;
  std::vector<Vec3> b;
};

/// Object A and Object B centers inside one block such that
/// satisfies_preposition(A, prep, B) holds and nothing interpenetrates.
/// Throws std::invalid_argument on counts the block cannot host and
/// std::runtime_error when the retry budget runs out.
RelationPlacement place_relation(Preposition prep, int count_a, int count_b, const Vec3& anchor,
                                 std::mt19937_64& rng, const SceneConfig& cfg);

/// Concrete group for a description at `anchor`. Counts follow the
/// determiners; proximity is not enforced here (it depends on the anchor).
GroupSpec realize(const Instruction& description, const Vec3& anchor, std::mt19937_64& rng,
                  const SceneConfig& cfg);

/// Anchor indices whose distance class agrees with every proximity
/// determiner of `instr`.
std::vector<int> compatible_locations(const Instruction& instr, const RoomLayout& room,
                                      const SpatialParams& params);

/// Builds the full episode scene. Deterministic in (instr, seed, cfg).
/// Throws std::runtime_error on placement failure.
SceneSpec build_scene(const Instruction& instr, std::uint64_t seed, const SceneConfig& cfg);

/// Oracle verdict per option (target first), as in SceneSpec::options().
std::vector<bool> verdicts(const SceneSpec& scene);

/// One-line JSON with a fixed field order. `with_verdicts` appends the
/// oracle verdicts for audit dumps.
std::string serialize(const SceneSpec& scene, bool with_verdicts = false);
SceneSpec parse_scene(const std::string& line);
/// Serialized room section alone; identical for every scene of a layout.
std::string serialize_room(const RoomLayout& room);

std::vector<SceneSpec> load_scenes(const std::filesystem::path& jsonl);

}  // namespace groundworld
