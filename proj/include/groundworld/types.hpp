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

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace groundworld {

using Vec3 = Eigen::Vector3d;

enum class Color : std::uint8_t { Red, Green, Blue, Yellow, Black };
enum class Shape : std::uint8_t { Capsule, Cube, Cylinder, Prism, Sphere };
enum class Determiner : std::uint8_t { A, Few, Some, Many, This, That, These, Those };
enum class Preposition : std::uint8_t { Above, Below, InFrontOf, Behind, Beside, On, Between, Among };
enum class EnvKind : std::uint8_t { D, P, DP };

inline constexpr std::array kAllColors = {Color::Red, Color::Green, Color::Blue, Color::Yellow,
                                          Color::Black};
inline constexpr std::array kAllShapes = {Shape::Capsule, Shape::Cube, Shape::Cylinder, Shape::Prism,
                                          Shape::Sphere};
inline constexpr std::array kAllDeterminers = {Determiner::A,    Determiner::Few,  Determiner::Some,
                                               Determiner::Many, Determiner::This, Determiner::That,
                                               Determiner::These, Determiner::Those};
inline constexpr std::array kAllPrepositions = {
    Preposition::Above,  Preposition::Below, Preposition::InFrontOf, Preposition::Behind,
    Preposition::Beside, Preposition::On,    Preposition::Between,   Preposition::Among};
inline constexpr std::array kAllEnvKinds = {EnvKind::D, EnvKind::P, EnvKind::DP};

/// One-hot index of an enumerator. Ids are the declaration order and never change.
template <typename E>
constexpr int id(E e) noexcept {
  return static_cast<int>(e);
}

std::string_view name(Color c);
std::string_view name(Shape s);
std::string_view name(Determiner d);
std::string_view name(Preposition p);
std::string_view name(EnvKind k);

std::optional<Color> parse_color(std::string_view token);
/// Accepts singular and plural surface forms ("cube", "cubes").
std::optional<Shape> parse_shape(std::string_view token);
std::optional<Determiner> parse_determiner(std::string_view token);
std::optional<Preposition> parse_preposition(std::string_view token);
/// Accepts "d", "p", "dp" and "d+p" in any case.
std::optional<EnvKind> parse_env_kind(std::string_view token);

constexpr bool is_quantity(Determiner d) noexcept { return id(d) < 4; }
constexpr bool is_proximity(Determiner d) noexcept { return id(d) >= 4; }
/// This/These: near the reference man. That/Those: far.
constexpr bool is_near(Determiner d) noexcept {
  return d == Determiner::This || d == Determiner::These;
}
constexpr bool is_far(Determiner d) noexcept {
  return d == Determiner::That || d == Determiner::Those;
}
/// Between and Among take an Object B of 2-9 instances.
constexpr bool is_multi_instance(Preposition p) noexcept {
  return p == Preposition::Between || p == Preposition::Among;
}

struct CountRange {
  int lo;
  int hi;
  constexpr bool contains(int n) const noexcept { return n >= lo && n <= hi; }
  friend constexpr bool operator==(CountRange, CountRange) = default;
};

/// Object counts a determiner admits: A 1, Few 2-3, Some 4-6, Many 7-9,
/// This/That exactly one, These/Those 2-9.
constexpr CountRange count_range(Determiner d) noexcept {
  switch (d) {
    case Determiner::A:
    case Determiner::This:
    case Determiner::That:
      return {1, 1};
    case Determiner::Few:
      return {2, 3};
    case Determiner::Some:
      return {4, 6};
    case Determiner::Many:
      return {7, 9};
    case Determiner::These:
    case Determiner::Those:
      return {2, 9};
  }
  return {1, 1};
}

struct ObjectPhrase {
  Color color{};
  Shape shape{};
  friend auto operator<=>(const ObjectPhrase&, const ObjectPhrase&) = default;
};

struct DInstruction {
  Determiner det{};
  ObjectPhrase obj{};
  friend auto operator<=>(const DInstruction&, const DInstruction&) = default;
};

struct PInstruction {
  ObjectPhrase object_a{};
  Preposition prep{};
  ObjectPhrase object_b{};
  friend auto operator<=>(const PInstruction&, const PInstruction&) = default;
};

struct DPInstruction {
  Determiner det_a{};
  ObjectPhrase object_a{};
  Preposition prep{};
  Determiner det_b{};
  ObjectPhrase object_b{};
  friend auto operator<=>(const DPInstruction&, const DPInstruction&) = default;
};

using Instruction = std::variant<DInstruction, PInstruction, DPInstruction>;

EnvKind kind_of(const Instruction& instr) noexcept;

/// How Object A and Object B must differ in P and DP instructions.
enum class DistinctnessRule : std::uint8_t {
  DifferBoth,  ///< different color and different shape
  DifferPair,  ///< not the same (color, shape) pair
};

std::string_view name(DistinctnessRule r);
std::optional<DistinctnessRule> parse_rule(std::string_view token);

bool objects_distinct(const ObjectPhrase& a, const ObjectPhrase& b, DistinctnessRule rule) noexcept;

/// Slot layout of the one-hot instruction encoding.
struct VocabLayout {
  std::vector<int> slot_dims;

  int slot_count() const noexcept { return static_cast<int>(slot_dims.size()); }
  int flat_size() const noexcept;
  friend bool operator==(const VocabLayout&, const VocabLayout&) = default;
};

/// D: [det, color, shape]; P: [colorA, shapeA, prep, colorB, shapeB];
/// DP: [detA, colorA, shapeA, prep, detB, colorB, shapeB].
VocabLayout vocab_sizes(EnvKind kind);

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Canonical lowercase, singular text, e.g. "few red cube".
std::string instruction_to_text(const Instruction& instr);

/// Inverse of instruction_to_text. Case-insensitive; plural nouns are
/// normalized; "in front of" is a single preposition token. Throws
/// ParseError on unknown tokens, wrong arity or indistinct objects.
Instruction text_to_instruction(std::string_view text,
                                DistinctnessRule rule = DistinctnessRule::DifferPair);

/// Yaw-only pose on the floor plane. `position.y()` is ignored by kinematics.
struct Pose {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;  ///< radians in [0, 2*pi); 0 faces +z

  friend bool operator==(const Pose&, const Pose&) = default;
};

double normalize_heading(double radians) noexcept;

}  // namespace groundworld
