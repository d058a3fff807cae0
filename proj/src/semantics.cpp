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

#include "groundworld/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <fmt/format.h>

namespace groundworld {

namespace {

using Vec2 = Eigen::Vector2d;

Vec2 ground(const Vec3& p) { return {p.x(), p.z()}; }

double min_along(const ObjectGroup& g, int axis) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : g.placements) m = std::min(m, p[axis]);
  return m;
}

double max_along(const ObjectGroup& g, int axis) {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& p : g.placements) m = std::max(m, p[axis]);
  return m;
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Zero inside the hull, else distance to its boundary.
double hull_distance(const Vec2& p, const std::vector<Vec2>& hull) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return (p - hull[0]).norm();
  if (hull.size() == 2) return segment_distance(p, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, p) < 0) inside = false;
    best = std::min(best, segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

bool strictly_between(const Vec3& p, const Vec3& a, const Vec3& b, double tolerance) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return false;
  const double t = (p - a).dot(ab) / len2;
  if (t <= 0.0 || t >= 1.0) return false;
  return (p - (a + t * ab)).norm() <= tolerance;
}

bool horizontally_aligned(const ObjectGroup& a, const ObjectGroup& b, const SpatialParams& sp) {
  return (ground(a.centroid()) - ground(b.centroid())).norm() <= sp.horizontal_tolerance;
}

bool same_height(const ObjectGroup& a, const ObjectGroup& b, const SpatialParams& sp) {
  return std::abs(a.centroid().y() - b.centroid().y()) <= sp.height_band;
}

template <typename E>
E pick(const std::vector<E>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

ObjectPhrase random_object(const GrammarConfig& vocab, std::mt19937_64& rng) {
  const Color c = pick(vocab.colors, rng);
  const Shape s = pick(vocab.shapes, rng);
  return {c, s};
}

// Draws (a, b) honoring the distinctness rule; returns the same pair back
// when the vocabulary cannot provide distinct objects.
std::pair<ObjectPhrase, ObjectPhrase> random_object_pair(const GrammarConfig& vocab,
                                                         std::mt19937_64& rng) {
  for (int i = 0; i < 64; ++i) {
    const ObjectPhrase a = random_object(vocab, rng);
    const ObjectPhrase b = random_object(vocab, rng);
    if (objects_distinct(a, b, vocab.rule)) return {a, b};
  }
  const ObjectPhrase a = random_object(vocab, rng);
  return {a, a};
}

}  // namespace

Vec3 ObjectGroup::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : placements) c += p;
  return placements.empty() ? c : Vec3(c / static_cast<double>(placements.size()));
}

std::vector<const PlacedGroup*> SceneSpec::options() const {
  std::vector<const PlacedGroup*> out{&target};
  for (const auto& d : distractors) out.push_back(&d);
  return out;
}

std::string_view name(DistractorRecipe r) {
  switch (r) {
    case DistractorRecipe::SameDeterminer:
      return "same_determiner";
    case DistractorRecipe::SameObject:
      return "same_object";
    case DistractorRecipe::SamePreposition:
      return "same_preposition";
    case DistractorRecipe::SameObjects:
      return "same_objects";
    case DistractorRecipe::AllRandom:
      return "all_random";
    case DistractorRecipe::SwappedAttributes:
      return "swapped_attributes";
    case DistractorRecipe::AlteredDeterminers:
      return "altered_determiners";
    case DistractorRecipe::ModifiedPreposition:
      return "modified_preposition";
  }
  return "?";
}

std::optional<DistractorRecipe> parse_recipe(std::string_view token) {
  for (int i = 0; i <= static_cast<int>(DistractorRecipe::ModifiedPreposition); ++i) {
    const auto r = static_cast<DistractorRecipe>(i);
    if (name(r) == token) return r;
  }
  return std::nullopt;
}

Determiner quantity_class(int count) {
  if (count < 1 || count > 9)
    throw std::out_of_range(fmt::format("object count {} outside 1..9", count));
  if (count == 1) return Determiner::A;
  if (count <= 3) return Determiner::Few;
  if (count <= 6) return Determiner::Some;
  return Determiner::Many;
}

double proximity_distance(const ObjectGroup& group, const Vec3& reference_man) {
  return (ground(group.centroid()) - ground(reference_man)).norm();
}

bool satisfies_determiner(const ObjectGroup& group, Determiner det, const Vec3& reference_man,
                          const SpatialParams& params) {
  const int n = group.count();
  if (!count_range(det).contains(n)) return false;
  if (is_quantity(det)) return true;
  const double d = proximity_distance(group, reference_man);
  return is_near(det) ? d <= params.near_far_threshold : d > params.near_far_threshold;
}

bool satisfies_preposition(const ObjectGroup& a, Preposition prep, const ObjectGroup& b,
                           const SpatialParams& sp) {
  if (a.count() == 0 || b.count() == 0)
    throw std::invalid_argument("preposition needs non-empty Object A and Object B");
  if (is_multi_instance(prep) && b.count() < 2)
    throw std::invalid_argument(
        fmt::format("'{}' needs at least two Object B instances, got {}", name(prep), b.count()));

  constexpr int X = 0, Y = 1, Z = 2;
  const double r = sp.object_radius;
  const double eps = sp.contact_epsilon;

  switch (prep) {
    case Preposition::Above:
      return min_along(a, Y) - r > max_along(b, Y) + r + eps && horizontally_aligned(a, b, sp);
    case Preposition::Below:
      return max_along(a, Y) + r < min_along(b, Y) - r - eps && horizontally_aligned(a, b, sp);
    case Preposition::On:
      return std::abs((min_along(a, Y) - r) - (max_along(b, Y) + r)) <= eps &&
             horizontally_aligned(a, b, sp);
    case Preposition::InFrontOf:
    case Preposition::Behind: {
      const bool ordered = prep == Preposition::InFrontOf
                               ? max_along(a, Z) < min_along(b, Z) - eps
                               : min_along(a, Z) > max_along(b, Z) + eps;
      return ordered && std::abs(a.centroid().x() - b.centroid().x()) <= sp.horizontal_tolerance &&
             same_height(a, b, sp);
    }
    case Preposition::Beside: {
      double gap = 0.0;
      if (max_along(a, X) < min_along(b, X))
        gap = (min_along(b, X) - r) - (max_along(a, X) + r);
      else if (min_along(a, X) > max_along(b, X))
        gap = (min_along(a, X) - r) - (max_along(b, X) + r);
      else
        return false;
      return gap > 0.0 && gap <= sp.beside_max_gap &&
             std::abs(a.centroid().z() - b.centroid().z()) <= sp.horizontal_tolerance &&
             same_height(a, b, sp);
    }
    case Preposition::Between:
      return std::all_of(a.placements.begin(), a.placements.end(), [&](const Vec3& p) {
        for (std::size_t i = 0; i < b.placements.size(); ++i)
          for (std::size_t j = i + 1; j < b.placements.size(); ++j)
            if (strictly_between(p, b.placements[i], b.placements[j],
                                 sp.between_collinearity_tolerance))
              return true;
        return false;
      });
    case Preposition::Among: {
      std::vector<Vec2> pts;
      for (const auto& p : b.placements) pts.push_back(ground(p));
      const auto hull = convex_hull(pts);
      return std::all_of(a.placements.begin(), a.placements.end(), [&](const Vec3& p) {
        return hull_distance(ground(p), hull) <= sp.among_hull_margin;
      });
    }
  }
  return false;
}

bool satisfies(const Instruction& instr, const GroupSpec& group, const SemanticContext& ctx) {
  const bool wants_anchor = kind_of(instr) != EnvKind::D;
  if (wants_anchor != group.anchor.has_value())
    throw std::invalid_argument(fmt::format("group structure does not match a {} instruction",
                                            name(kind_of(instr))));
  const ObjectGroup& a = group.objects;
  struct Visitor {
    const GroupSpec& g;
    const ObjectGroup& a;
    const SemanticContext& ctx;
    bool operator()(const DInstruction& i) const {
      return a.phrase == i.obj && satisfies_determiner(a, i.det, ctx.reference_man, ctx.params);
    }
    bool operator()(const PInstruction& i) const {
      const ObjectGroup& b = *g.anchor;
      if (a.phrase != i.object_a || b.phrase != i.object_b) return false;
      if (a.count() != 1) return false;
      const bool b_count_ok =
          is_multi_instance(i.prep) ? (b.count() >= 2 && b.count() <= 9) : b.count() == 1;
      if (!b_count_ok) return false;
      return satisfies_preposition(a, i.prep, b, ctx.params);
    }
    bool operator()(const DPInstruction& i) const {
      const ObjectGroup& b = *g.anchor;
      if (a.phrase != i.object_a || b.phrase != i.object_b) return false;
      if (!satisfies_determiner(a, i.det_a, ctx.reference_man, ctx.params)) return false;
      if (!satisfies_determiner(b, i.det_b, ctx.reference_man, ctx.params)) return false;
      if (is_multi_instance(i.prep) && b.count() < 2) return false;
      return satisfies_preposition(a, i.prep, b, ctx.params);
    }
  };
  return std::visit(Visitor{group, a, ctx}, instr);
}

std::vector<DistractorRecipe> recipes_for(EnvKind kind) {
  using R = DistractorRecipe;
  switch (kind) {
    case EnvKind::D:
      return {R::SameDeterminer, R::SameObject, R::AllRandom};
    case EnvKind::P:
      return {R::SamePreposition, R::SameObjects, R::AllRandom};
    case EnvKind::DP:
      return {R::SwappedAttributes, R::AlteredDeterminers, R::ModifiedPreposition};
  }
  return {};
}

Instruction propose_distractor(const Instruction& target, DistractorRecipe recipe,
                               const GrammarConfig& vocab, std::mt19937_64& rng) {
  using R = DistractorRecipe;
  if (const auto* d = std::get_if<DInstruction>(&target)) {
    DInstruction out = *d;
    switch (recipe) {
      case R::SameDeterminer:
        out.obj = random_object(vocab, rng);
        break;
      case R::SameObject:
        out.det = pick(vocab.determiners, rng);
        break;
      case R::AllRandom:
        out.det = pick(vocab.determiners, rng);
        out.obj = random_object(vocab, rng);
        break;
      default:
        throw std::invalid_argument(fmt::format("recipe {} does not apply to D", name(recipe)));
    }
    return out;
  }
  if (const auto* p = std::get_if<PInstruction>(&target)) {
    PInstruction out = *p;
    switch (recipe) {
      case R::SamePreposition:
        std::tie(out.object_a, out.object_b) = random_object_pair(vocab, rng);
        break;
      case R::SameObjects:
        out.prep = pick(vocab.prepositions, rng);
        break;
      case R::AllRandom:
        std::tie(out.object_a, out.object_b) = random_object_pair(vocab, rng);
        out.prep = pick(vocab.prepositions, rng);
        break;
      default:
        throw std::invalid_argument(fmt::format("recipe {} does not apply to P", name(recipe)));
    }
    return out;
  }
  const auto& dp = std::get<DPInstruction>(target);
  DPInstruction out = dp;
  switch (recipe) {
    case R::SwappedAttributes:
      std::swap(out.object_a, out.object_b);
      break;
    case R::AlteredDeterminers: {
      std::vector<std::pair<Determiner, Determiner>> options;
      for (Determiner a : vocab.determiners)
        for (Determiner b : vocab.determiners)
          if ((a != dp.det_a || b != dp.det_b) && dp_feasible(a, dp.prep, b))
            options.emplace_back(a, b);
      if (!options.empty()) std::tie(out.det_a, out.det_b) = pick(options, rng);
      break;
    }
    case R::ModifiedPreposition: {
      std::vector<Preposition> options;
      for (Preposition q : vocab.prepositions)
        if (q != dp.prep && dp_feasible(dp.det_a, q, dp.det_b)) options.push_back(q);
      if (!options.empty()) out.prep = pick(options, rng);
      break;
    }
    default:
      throw std::invalid_argument(fmt::format("recipe {} does not apply to DP", name(recipe)));
  }
  return out;
}

std::vector<Distractor> make_distractors(const Instruction& target, std::span<const int> slots,
                                         const GrammarConfig& vocab, const GroupRealizer& realize,
                                         const SemanticContext& ctx, std::mt19937_64& rng,
                                         int budget) {
  auto recipes = recipes_for(kind_of(target));
  std::shuffle(recipes.begin(), recipes.end(), rng);

  std::vector<Distractor> out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    bool placed = false;
    for (std::size_t shift = 0; shift < recipes.size() && !placed; ++shift) {
      const DistractorRecipe recipe = recipes[(k + shift) % recipes.size()];
      for (int attempt = 0; attempt < budget; ++attempt) {
        Instruction description = propose_distractor(target, recipe, vocab, rng);
        GroupSpec group;
        try {
          group = realize(description, slots[k], rng);
        } catch (const std::runtime_error&) {
          continue;  // description not realizable here; draw again
        }
        if (!satisfies(target, group, ctx)) {
          out.push_back({std::move(description), recipe, std::move(group)});
          placed = true;
          break;
        }
      }
    }
    if (!placed)
      throw std::runtime_error(fmt::format("no distractor for '{}' after {} draws per recipe",
                                           instruction_to_text(target), budget));
  }
  return out;
}

}  // namespace groundworld
