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

// Ground-truth oracles: does a group of placed objects satisfy an
// instruction? Geometry is expressed in the fixed room frame: y is up,
// depth grows along +z away from the reference man, lateral is x.

#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "groundworld/grammar.hpp"
#include "groundworld/scene_spec.hpp"

namespace groundworld {

struct SemanticContext {
  Vec3 reference_man = Vec3::Zero();
  SpatialParams params;
};

/// A (1), Few (2-3), Some (4-6), Many (7-9). Throws std::out_of_range
/// outside 1..9.
Determiner quantity_class(int count);

/// Ground-plane distance from the group's centroid to the reference man.
double proximity_distance(const ObjectGroup& group, const Vec3& reference_man);

bool satisfies_determiner(const ObjectGroup& group, Determiner det, const Vec3& reference_man,
                          const SpatialParams& params);

/// Group-level spatial predicate "A prep B". Single objects are groups of
/// one. Throws std::invalid_argument on empty groups or when Between/Among
/// get fewer than two B instances.
bool satisfies_preposition(const ObjectGroup& a, Preposition prep, const ObjectGroup& b,
                           const SpatialParams& params);

/// Phrase match, determiner checks and the spatial relation, as the
/// instruction's kind demands. In P, Object A is one instance and Object B
/// is one instance (2-9 for Between/Among). Throws std::invalid_argument
/// when the group lacks (or has a spurious) Object B.
bool satisfies(const Instruction& instr, const GroupSpec& group, const SemanticContext& ctx);

/// Recipes used to build non-targets for each environment.
std::vector<DistractorRecipe> recipes_for(EnvKind kind);

/// Draws the description of one non-target following `recipe`. Random
/// attributes come from `vocab`'s subsets.
Instruction propose_distractor(const Instruction& target, DistractorRecipe recipe,
                               const GrammarConfig& vocab, std::mt19937_64& rng);

struct Distractor {
  Instruction description;
  DistractorRecipe recipe{};
  GroupSpec group;
};

/// Builds a concrete group for a description at location slot `slot`.
using GroupRealizer =
    std::function<GroupSpec(const Instruction& description, int slot, std::mt19937_64& rng)>;

/// One non-target per slot. Recipes are shuffled over the slots; each is
/// re-drawn until the oracle rejects it for `target`. A recipe that keeps
/// failing after `budget` draws hands over to the next recipe; if every
/// recipe fails, throws std::runtime_error.
std::vector<Distractor> make_distractors(const Instruction& target, std::span<const int> slots,
                                         const GrammarConfig& vocab, const GroupRealizer& realize,
                                         const SemanticContext& ctx, std::mt19937_64& rng,
                                         int budget = 200);

}  // namespace groundworld
