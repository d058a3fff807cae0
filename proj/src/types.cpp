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

#include "groundworld/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace groundworld {

namespace {

constexpr std::array<std::string_view, 5> kColorNames = {"red", "green", "blue", "yellow", "black"};
constexpr std::array<std::string_view, 5> kShapeNames = {"capsule", "cube", "cylinder", "prism",
                                                         "sphere"};
constexpr std::array<std::string_view, 5> kShapePlurals = {"capsules", "cubes", "cylinders",
                                                           "prisms", "spheres"};
constexpr std::array<std::string_view, 8> kDeterminerNames = {"a",    "few",  "some",  "many",
                                                              "this", "that", "these", "those"};
constexpr std::array<std::string_view, 8> kPrepositionNames = {
    "above", "below", "in front of", "behind", "beside", "on", "between", "among"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view token) {
  const std::string t = lower(token);
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == t) return static_cast<E>(i);
  }
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!current.empty()) tokens.push_back(lower(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(lower(current));
  return tokens;
}

// Re-joins "in front of" into a single token.
std::vector<std::string> merge_multiword(std::vector<std::string> tokens) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "in" && i + 2 < tokens.size() && tokens[i + 1] == "front" &&
        tokens[i + 2] == "of") {
      out.emplace_back("in front of");
      i += 2;
    } else {
      out.push_back(tokens[i]);
    }
  }
  return out;
}

Determiner expect_det(const std::string& tok) {
  if (auto d = parse_determiner(tok)) return *d;
  throw ParseError(fmt::format("expected determiner, got '{}'", tok));
}

ObjectPhrase expect_object(const std::string& color_tok, const std::string& shape_tok) {
  auto c = parse_color(color_tok);
  if (!c) throw ParseError(fmt::format("expected color, got '{}'", color_tok));
  auto s = parse_shape(shape_tok);
  if (!s) throw ParseError(fmt::format("expected shape, got '{}'", shape_tok));
  return {*c, *s};
}

Preposition expect_prep(const std::string& tok) {
  if (auto p = parse_preposition(tok)) return *p;
  throw ParseError(fmt::format("expected preposition, got '{}'", tok));
}

}  // namespace

std::string_view name(Color c) { return kColorNames.at(id(c)); }
std::string_view name(Shape s) { return kShapeNames.at(id(s)); }
std::string_view name(Determiner d) { return kDeterminerNames.at(id(d)); }
std::string_view name(Preposition p) { return kPrepositionNames.at(id(p)); }

std::string_view name(EnvKind k) {
  switch (k) {
    case EnvKind::D:
      return "d";
    case EnvKind::P:
      return "p";
    case EnvKind::DP:
      return "dp";
  }
  return "?";
}

std::string_view name(DistinctnessRule r) {
  return r == DistinctnessRule::DifferBoth ? "both" : "pair";
}

std::optional<Color> parse_color(std::string_view token) {
  return lookup<Color>(kColorNames, token);
}

std::optional<Shape> parse_shape(std::string_view token) {
  if (auto s = lookup<Shape>(kShapeNames, token)) return s;
  return lookup<Shape>(kShapePlurals, token);
}

std::optional<Determiner> parse_determiner(std::string_view token) {
  return lookup<Determiner>(kDeterminerNames, token);
}

std::optional<Preposition> parse_preposition(std::string_view token) {
  return lookup<Preposition>(kPrepositionNames, token);
}

std::optional<EnvKind> parse_env_kind(std::string_view token) {
  const std::string t = lower(token);
  if (t == "d") return EnvKind::D;
  if (t == "p") return EnvKind::P;
  if (t == "dp" || t == "d+p") return EnvKind::DP;
  return std::nullopt;
}

std::optional<DistinctnessRule> parse_rule(std::string_view token) {
  const std::string t = lower(token);
  if (t == "both") return DistinctnessRule::DifferBoth;
  if (t == "pair") return DistinctnessRule::DifferPair;
  return std::nullopt;
}

EnvKind kind_of(const Instruction& instr) noexcept {
  switch (instr.index()) {
    case 0:
      return EnvKind::D;
    case 1:
      return EnvKind::P;
    default:
      return EnvKind::DP;
  }
}

bool objects_distinct(const ObjectPhrase& a, const ObjectPhrase& b, DistinctnessRule rule) noexcept {
  if (rule == DistinctnessRule::DifferBoth) return a.color != b.color && a.shape != b.shape;
  return a != b;
}

int VocabLayout::flat_size() const noexcept {
  return std::accumulate(slot_dims.begin(), slot_dims.end(), 0);
}

VocabLayout vocab_sizes(EnvKind kind) {
  constexpr int kDet = 8, kColor = 5, kShape = 5, kPrep = 8;
  switch (kind) {
    case EnvKind::D:
      return {{kDet, kColor, kShape}};
    case EnvKind::P:
      return {{kColor, kShape, kPrep, kColor, kShape}};
    case EnvKind::DP:
      return {{kDet, kColor, kShape, kPrep, kDet, kColor, kShape}};
  }
  return {};
}

std::string instruction_to_text(const Instruction& instr) {
  struct Visitor {
    std::string operator()(const DInstruction& i) const {
      return fmt::format("{} {} {}", name(i.det), name(i.obj.color), name(i.obj.shape));
    }
    std::string operator()(const PInstruction& i) const {
      return fmt::format("{} {} {} {} {}", name(i.object_a.color), name(i.object_a.shape),
                         name(i.prep), name(i.object_b.color), name(i.object_b.shape));
    }
    std::string operator()(const DPInstruction& i) const {
      return fmt::format("{} {} {} {} {} {} {}", name(i.det_a), name(i.object_a.color),
                         name(i.object_a.shape), name(i.prep), name(i.det_b),
                         name(i.object_b.color), name(i.object_b.shape));
    }
  };
  return std::visit(Visitor{}, instr);
}

Instruction text_to_instruction(std::string_view text, DistinctnessRule rule) {
  const auto tok = merge_multiword(tokenize(text));
  switch (tok.size()) {
    case 3:
      return DInstruction{expect_det(tok[0]), expect_object(tok[1], tok[2])};
    case 5: {
      PInstruction p{expect_object(tok[0], tok[1]), expect_prep(tok[2]),
                     expect_object(tok[3], tok[4])};
      if (!objects_distinct(p.object_a, p.object_b, rule))
        throw ParseError(fmt::format("objects must differ ({}): '{}'", name(rule), text));
      return p;
    }
    case 7: {
      DPInstruction dp{expect_det(tok[0]), expect_object(tok[1], tok[2]), expect_prep(tok[3]),
                       expect_det(tok[4]), expect_object(tok[5], tok[6])};
      if (!objects_distinct(dp.object_a, dp.object_b, rule))
        throw ParseError(fmt::format("objects must differ ({}): '{}'", name(rule), text));
      return dp;
    }
    default:
      throw ParseError(fmt::format("wrong arity ({} tokens): '{}'", tok.size(), text));
  }
}

double normalize_heading(double radians) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double h = std::fmod(radians, kTwoPi);
  if (h < 0.0) h += kTwoPi;
  if (h >= kTwoPi) h = 0.0;
  return h;
}

}  // namespace groundworld
