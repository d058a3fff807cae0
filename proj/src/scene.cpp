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

#include "groundworld/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

namespace groundworld {

using json = nlohmann::ordered_json;

namespace {

struct Cell {
  int i, j, k;
  friend bool operator==(const Cell&, const Cell&) = default;
};

std::vector<Cell> all_cells() {
  std::vector<Cell> out;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) out.push_back({i, j, k});
  return out;
}

int coord(const Cell& c, int axis) { return axis == 0 ? c.i : axis == 1 ? c.j : c.k; }

Vec3 jitter(std::mt19937_64& rng, double amount) {
  std::uniform_real_distribution<double> u(-amount, amount);
  const double x = u(rng);
  const double y = u(rng);
  const double z = u(rng);
  return {x, y, z};
}

std::vector<Vec3> to_points(const std::vector<Cell>& cells, const Vec3& anchor,
                            std::mt19937_64& rng, const SceneConfig& cfg) {
  std::vector<Vec3> out;
  for (const auto& c : cells)
    out.push_back(cell_center(anchor, cfg.room.cell, c.i, c.j, c.k) + jitter(rng, cfg.jitter));
  return out;
}

// The n cells of `pool` closest to `focus`, ties broken at random.
std::vector<Cell> nearest(std::vector<Cell> pool, const Eigen::Vector3d& focus, std::size_t n,
                          std::mt19937_64& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  std::stable_sort(pool.begin(), pool.end(), [&](const Cell& a, const Cell& b) {
    const Eigen::Vector3d pa(a.i, a.j, a.k), pb(b.i, b.j, b.k);
    return (pa - focus).squaredNorm() < (pb - focus).squaredNorm();
  });
  pool.resize(std::min(n, pool.size()));
  return pool;
}

std::vector<Cell> plane(int axis, int layer) {
  std::vector<Cell> out;
  for (const auto& c : all_cells())
    if (coord(c, axis) == layer) out.push_back(c);
  return out;
}

int draw_count(CountRange r, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(r.lo, r.hi);
  return d(rng);
}

ObjectGroup group_of(const ObjectPhrase& phrase, std::vector<Vec3> placements) {
  return {phrase, std::move(placements)};
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json group_json(const ObjectGroup& g) {
  json j;
  j["color"] = name(g.phrase.color);
  j["shape"] = name(g.phrase.shape);
  json pts = json::array();
  for (const auto& p : g.placements) pts.push_back(vec_json(p));
  j["placements"] = std::move(pts);
  return j;
}

ObjectGroup group_from(const json& j) {
  ObjectGroup g;
  const auto c = parse_color(j.at("color").get<std::string>());
  const auto s = parse_shape(j.at("shape").get<std::string>());
  if (!c || !s) throw ParseError("scene: bad object phrase");
  g.phrase = {*c, *s};
  for (const auto& p : j.at("placements")) g.placements.push_back(vec_from(p));
  return g;
}

json placed_json(const PlacedGroup& p) {
  json j;
  j["location"] = p.location;
  j["description"] = instruction_to_text(p.description);
  j["recipe"] = p.recipe ? json(std::string(name(*p.recipe))) : json(nullptr);
  j["objects"] = group_json(p.group.objects);
  j["anchor"] = p.group.anchor ? group_json(*p.group.anchor) : json(nullptr);
  return j;
}

PlacedGroup placed_from(const json& j) {
  PlacedGroup p;
  p.location = j.at("location").get<int>();
  p.description = text_to_instruction(j.at("description").get<std::string>());
  if (!j.at("recipe").is_null()) {
    p.recipe = parse_recipe(j.at("recipe").get<std::string>());
    if (!p.recipe) throw ParseError("scene: unknown recipe");
  }
  p.group.objects = group_from(j.at("objects"));
  if (!j.at("anchor").is_null()) p.group.anchor = group_from(j.at("anchor"));
  return p;
}

json pose_json(const Pose& p) {
  json j;
  j["position"] = vec_json(p.position);
  j["heading"] = p.heading;
  return j;
}

Pose pose_from(const json& j) { return {vec_from(j.at("position")), j.at("heading").get<double>()}; }

json room_json(const RoomLayout& r) {
  json j;
  j["id"] = r.id;
  j["name"] = r.name;
  j["width"] = r.width;
  j["depth"] = r.depth;
  j["height"] = r.height;
  j["cell"] = r.cell;
  json anchors = json::array();
  for (const auto& a : r.anchors) anchors.push_back(vec_json(a));
  j["anchors"] = std::move(anchors);
  json marks = json::array();
  for (const auto& l : r.landmarks) {
    json m;
    m["kind"] = name(l.kind);
    m["pose"] = pose_json(l.pose);
    m["size"] = vec_json(l.size);
    marks.push_back(std::move(m));
  }
  j["landmarks"] = std::move(marks);
  j["spawn"] = pose_json(r.spawn);
  return j;
}

RoomLayout room_from(const json& j) {
  RoomLayout r;
  r.id = j.at("id").get<int>();
  r.name = j.at("name").get<std::string>();
  r.width = j.at("width").get<double>();
  r.depth = j.at("depth").get<double>();
  r.height = j.at("height").get<double>();
  r.cell = j.at("cell").get<double>();
  for (const auto& a : j.at("anchors")) r.anchors.push_back(vec_from(a));
  for (const auto& m : j.at("landmarks")) {
    Landmark l;
    const auto kind = m.at("kind").get<std::string>();
    bool found = false;
    for (auto k : {LandmarkKind::Door, LandmarkKind::Window, LandmarkKind::Shelf,
                   LandmarkKind::ReferenceMan})
      if (name(k) == kind) l.kind = k, found = true;
    if (!found) throw ParseError("scene: unknown landmark " + kind);
    l.pose = pose_from(m.at("pose"));
    l.size = vec_from(m.at("size"));
    r.landmarks.push_back(l);
  }
  r.spawn = pose_from(j.at("spawn"));
  return r;
}

json params_json(const SpatialParams& p) {
  json j;
  j["horizontal_tolerance"] = p.horizontal_tolerance;
  j["contact_epsilon"] = p.contact_epsilon;
  j["beside_max_gap"] = p.beside_max_gap;
  j["near_far_threshold"] = p.near_far_threshold;
  j["between_collinearity_tolerance"] = p.between_collinearity_tolerance;
  j["among_hull_margin"] = p.among_hull_margin;
  j["height_band"] = p.height_band;
  j["object_radius"] = p.object_radius;
  return j;
}

SpatialParams params_from(const json& j) {
  SpatialParams p;
  p.horizontal_tolerance = j.at("horizontal_tolerance").get<double>();
  p.contact_epsilon = j.at("contact_epsilon").get<double>();
  p.beside_max_gap = j.at("beside_max_gap").get<double>();
  p.near_far_threshold = j.at("near_far_threshold").get<double>();
  p.between_collinearity_tolerance = j.at("between_collinearity_tolerance").get<double>();
  p.among_hull_margin = j.at("among_hull_margin").get<double>();
  p.height_band = j.at("height_band").get<double>();
  p.object_radius = j.at("object_radius").get<double>();
  return p;
}

std::vector<Landmark> standard_landmarks(const RoomLayout& r) {
  const double pi = std::numbers::pi;
  return {
      {LandmarkKind::Door, {{r.width - 0.05, 0.0, r.depth / 2}, pi / 2}, {1.0, 2.1, 0.1}},
      {LandmarkKind::Window, {{r.width / 2, 1.2, r.depth - 0.05}, 0.0}, {2.4, 1.2, 0.1}},
      {LandmarkKind::Shelf, {{0.25, 0.0, r.depth / 2}, pi / 2}, {1.6, 1.8, 0.5}},
      {LandmarkKind::ReferenceMan, {{r.width / 2, 0.0, 0.6}, 0.0}, {0.5, 1.5, 0.3}},
  };
}

}  // namespace

std::string_view name(LandmarkKind k) {
  switch (k) {
    case LandmarkKind::Door:
      return "door";
    case LandmarkKind::Window:
      return "window";
    case LandmarkKind::Shelf:
      return "shelf";
    case LandmarkKind::ReferenceMan:
      return "reference_man";
  }
  return "?";
}

RoomLayout RoomLayout::standard() {
  RoomLayout r;
  r.id = 0;
  r.name = "standard";
  r.anchors = {{3.0, 0.0, 4.0}, {9.0, 0.0, 4.0}, {3.0, 0.0, 12.0}, {9.0, 0.0, 12.0}};
  r.landmarks = standard_landmarks(r);
  r.spawn = {{r.width / 2, 0.0, r.depth / 2}, 0.0};
  return r;
}

RoomLayout RoomLayout::pair() {
  RoomLayout r = standard();
  r.id = 1;
  r.name = "pair";
  r.anchors = {{4.1, 0.0, 12.0}, {7.9, 0.0, 12.0}};
  return r;
}

RoomLayout RoomLayout::by_id(int id) {
  switch (id) {
    case 0:
      return standard();
    case 1:
      return pair();
  }
  throw std::invalid_argument(fmt::format("unknown room layout id {}", id));
}

const Landmark& RoomLayout::landmark(LandmarkKind kind) const {
  for (const auto& l : landmarks)
    if (l.kind == kind) return l;
  throw std::out_of_range(fmt::format("room has no {}", groundworld::name(kind)));
}

Vec3 cell_center(const Vec3& anchor, double cell, int i, int j, int k) {
  return anchor + Vec3((i - 1) * cell, 0.5 * cell + j * cell, (k - 1) * cell);
}

bool inside_block(const std::vector<Vec3>& placements, const Vec3& anchor, double cell) {
  const double half = 1.5 * cell;
  return std::all_of(placements.begin(), placements.end(), [&](const Vec3& p) {
    return std::abs(p.x() - anchor.x()) <= half && std::abs(p.z() - anchor.z()) <= half &&
           p.y() >= anchor.y() && p.y() <= anchor.y() + 3.0 * cell;
  });
}

bool non_overlapping(const std::vector<Vec3>& placements, double radius) {
  for (std::size_t i = 0; i < placements.size(); ++i)
    for (std::size_t j = i + 1; j < placements.size(); ++j)
      if ((placements[i] - placements[j]).norm() <= 2.0 * radius) return false;
  return true;
}

RelationPlacement place_relation(Preposition prep, int count_a, int count_b, const Vec3& anchor,
                                 std::mt19937_64& rng, const SceneConfig& cfg) {
  const bool multi = is_multi_instance(prep);
  if (count_a < 1 || count_b < 1 || count_a > 9 || count_b > 9)
    throw std::invalid_argument(fmt::format("counts {} and {} outside 1..9", count_a, count_b));
  if (multi && (count_a != 1 || count_b < 2))
    throw std::invalid_argument(fmt::format("'{}' needs one Object A and 2-9 Object B, got {}/{}",
                                            name(prep), count_a, count_b));

  const SpatialParams& sp = cfg.params;
  const double r = sp.object_radius;
  const Eigen::Vector3d center(1, 1, 1);
  std::uniform_int_distribution<int> coin(0, 1), layer(0, 2);

  for (int attempt = 0; attempt < cfg.retry_budget; ++attempt) {
    // Early attempts spread around a random cell; later ones stay centered.
    Eigen::Vector3d focus = center;
    if (attempt < cfg.retry_budget / 2) focus = Eigen::Vector3d(layer(rng), layer(rng), layer(rng));

    RelationPlacement out;
    switch (prep) {
      case Preposition::Above:
      case Preposition::Below:
      case Preposition::InFrontOf:
      case Preposition::Behind:
      case Preposition::Beside: {
        int axis = 1, la = 2;
        if (prep == Preposition::Below) la = 0;
        if (prep == Preposition::InFrontOf) axis = 2, la = 0;
        if (prep == Preposition::Behind) axis = 2, la = 2;
        if (prep == Preposition::Beside) axis = 0, la = 2 * coin(rng);
        const int lb = 2 - la;
        Eigen::Vector3d fa = focus, fb = focus;
        fa[axis] = la;
        fb[axis] = lb;
        out.a = to_points(nearest(plane(axis, la), fa, count_a, rng), anchor, rng, cfg);
        out.b = to_points(nearest(plane(axis, lb), fb, count_b, rng), anchor, rng, cfg);
        break;
      }
      case Preposition::On: {
        Eigen::Vector3d fb = focus;
        fb[1] = 0;
        const auto b_cells = nearest(plane(1, 0), fb, count_b, rng);
        out.b = to_points(b_cells, anchor, rng, cfg);
        Eigen::Vector3d fa = Eigen::Vector3d::Zero();
        for (const auto& c : b_cells) fa += Eigen::Vector3d(c.i, 1, c.k);
        fa /= static_cast<double>(b_cells.size());
        double top = -1e9;
        for (const auto& p : out.b) top = std::max(top, p.y());
        out.a = to_points(nearest(plane(1, 1), fa, count_a, rng), anchor, rng, cfg);
        for (auto& p : out.a) p.y() = top + 2.0 * r + 0.25 * sp.contact_epsilon;
        break;
      }
      case Preposition::Between: {
        const int j = layer(rng);
        const Cell a{1, j, 1};
        std::vector<std::pair<Cell, Cell>> pairs = {
            {{0, j, 1}, {2, j, 1}}, {{1, j, 0}, {1, j, 2}}, {{0, j, 0}, {2, j, 2}},
            {{0, j, 2}, {2, j, 0}}};
        if (j == 1) pairs.push_back({{1, 0, 1}, {1, 2, 1}});
        std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
        const auto [b1, b2] = pairs[pick(rng)];
        std::vector<Cell> rest;
        for (const auto& c : all_cells())
          if (c != a && c != b1 && c != b2) rest.push_back(c);
        std::shuffle(rest.begin(), rest.end(), rng);
        std::vector<Cell> b_cells{b1, b2};
        b_cells.insert(b_cells.end(), rest.begin(), rest.begin() + (count_b - 2));
        out.a = to_points({a}, anchor, rng, cfg);
        out.b = to_points(b_cells, anchor, rng, cfg);
        break;
      }
      case Preposition::Among: {
        const Cell a{1, layer(rng), 1};
        std::vector<std::pair<int, int>> ring;
        for (int k = 0; k < 3; ++k)
          for (int i = 0; i < 3; ++i)
            if (i != 1 || k != 1) ring.emplace_back(i, k);
        std::shuffle(ring.begin(), ring.end(), rng);
        std::vector<Cell> b_cells;
        for (int n = 0; n < count_b; ++n) {
          const auto [i, k] = ring[static_cast<std::size_t>(n) % ring.size()];
          // A ninth instance shares a column with an earlier one.
          int j = layer(rng);
          for (int tries = 0; tries < 3; ++tries) {
            const Cell c{i, j, k};
            if (std::find(b_cells.begin(), b_cells.end(), c) == b_cells.end()) break;
            j = (j + 1) % 3;
          }
          b_cells.push_back({i, j, k});
        }
        out.a = to_points({a}, anchor, rng, cfg);
        out.b = to_points(b_cells, anchor, rng, cfg);
        break;
      }
    }

    std::vector<Vec3> everything = out.a;
    everything.insert(everything.end(), out.b.begin(), out.b.end());
    if (!non_overlapping(everything, r) || !inside_block(everything, anchor, cfg.room.cell))
      continue;
    if (satisfies_preposition(group_of({}, out.a), prep, group_of({}, out.b), sp)) return out;
  }
  throw std::runtime_error(fmt::format("could not place '{}' with {}/{} objects in {} attempts",
                                       name(prep), count_a, count_b, cfg.retry_budget));
}

GroupSpec realize(const Instruction& description, const Vec3& anchor, std::mt19937_64& rng,
                  const SceneConfig& cfg) {
  GroupSpec g;
  if (const auto* d = std::get_if<DInstruction>(&description)) {
    auto cells = all_cells();
    std::shuffle(cells.begin(), cells.end(), rng);
    cells.resize(draw_count(count_range(d->det), rng));
    g.objects = group_of(d->obj, to_points(cells, anchor, rng, cfg));
    return g;
  }
  if (const auto* p = std::get_if<PInstruction>(&description)) {
    const int nb = is_multi_instance(p->prep) ? draw_count({2, 9}, rng) : 1;
    auto placed = place_relation(p->prep, 1, nb, anchor, rng, cfg);
    g.objects = group_of(p->object_a, std::move(placed.a));
    g.anchor = group_of(p->object_b, std::move(placed.b));
    return g;
  }
  const auto& dp = std::get<DPInstruction>(description);
  const int na = draw_count(count_range(dp.det_a), rng);
  const int nb = draw_count(count_range(dp.det_b), rng);
  auto placed = place_relation(dp.prep, na, nb, anchor, rng, cfg);
  g.objects = group_of(dp.object_a, std::move(placed.a));
  g.anchor = group_of(dp.object_b, std::move(placed.b));
  return g;
}

std::vector<int> compatible_locations(const Instruction& instr, const RoomLayout& room,
                                      const SpatialParams& params) {
  std::vector<Determiner> dets;
  if (const auto* d = std::get_if<DInstruction>(&instr)) dets = {d->det};
  if (const auto* dp = std::get_if<DPInstruction>(&instr)) dets = {dp->det_a, dp->det_b};

  const Vec3 man = room.reference_man();
  std::vector<int> out;
  for (int loc = 0; loc < room.anchor_count(); ++loc) {
    const Vec3& a = room.anchors[loc];
    const double dist = std::hypot(a.x() - man.x(), a.z() - man.z());
    const bool near = dist <= params.near_far_threshold;
    const bool ok = std::all_of(dets.begin(), dets.end(), [&](Determiner d) {
      return is_quantity(d) || (is_near(d) ? near : !near);
    });
    if (ok) out.push_back(loc);
  }
  return out;
}

SceneSpec build_scene(const Instruction& instr, std::uint64_t seed, const SceneConfig& cfg) {
  std::mt19937_64 rng(seed);
  SceneSpec scene;
  scene.kind = kind_of(instr);
  scene.instruction = instr;
  scene.room = cfg.room;
  scene.seed = seed;
  scene.params = cfg.params;
  const SemanticContext ctx{cfg.room.reference_man(), cfg.params};

  const auto locations = compatible_locations(instr, cfg.room, cfg.params);
  if (locations.empty())
    throw std::runtime_error(
        fmt::format("no location in layout '{}' suits '{}'", cfg.room.name, instruction_to_text(instr)));
  std::uniform_int_distribution<std::size_t> pick(0, locations.size() - 1);
  const int target_loc = locations[pick(rng)];

  bool placed = false;
  for (int attempt = 0; attempt < cfg.retry_budget && !placed; ++attempt) {
    GroupSpec g = realize(instr, cfg.room.anchors[target_loc], rng, cfg);
    if (satisfies(instr, g, ctx)) {
      scene.target = {std::move(g), target_loc, instr, std::nullopt};
      placed = true;
    }
  }
  if (!placed)
    throw std::runtime_error(fmt::format("could not realize target '{}'", instruction_to_text(instr)));

  std::vector<int> slots;
  for (int loc = 0; loc < cfg.room.anchor_count(); ++loc)
    if (loc != target_loc) slots.push_back(loc);
  std::shuffle(slots.begin(), slots.end(), rng);

  GrammarConfig vocab = cfg.vocab;
  vocab.kind = scene.kind;
  const GroupRealizer realizer = [&](const Instruction& d, int slot, std::mt19937_64& g) {
    return realize(d, cfg.room.anchors.at(slot), g, cfg);
  };
  auto distractors = make_distractors(instr, slots, vocab, realizer, ctx, rng, cfg.retry_budget);
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    auto& d = distractors[i];
    scene.distractors.push_back({std::move(d.group), slots[i], std::move(d.description), d.recipe});
  }
  return scene;
}

std::vector<bool> verdicts(const SceneSpec& scene) {
  const SemanticContext ctx{scene.reference_man(), scene.params};
  std::vector<bool> out;
  for (const auto* opt : scene.options()) out.push_back(satisfies(scene.instruction, opt->group, ctx));
  return out;
}

std::string serialize(const SceneSpec& scene, bool with_verdicts) {
  json j;
  j["env"] = name(scene.kind);
  j["instruction"] = instruction_to_text(scene.instruction);
  j["seed"] = scene.seed;
  j["room"] = room_json(scene.room);
  j["params"] = params_json(scene.params);
  j["target"] = placed_json(scene.target);
  json ds = json::array();
  for (const auto& d : scene.distractors) ds.push_back(placed_json(d));
  j["distractors"] = std::move(ds);
  if (with_verdicts) {
    json v = json::array();
    for (bool b : verdicts(scene)) v.push_back(b);
    j["verdicts"] = std::move(v);
  }
  return j.dump();
}

SceneSpec parse_scene(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scene: ") + e.what());
  }
  try {
    SceneSpec s;
    const auto kind = parse_env_kind(j.at("env").get<std::string>());
    if (!kind) throw ParseError("scene: unknown env kind");
    s.kind = *kind;
    s.instruction = text_to_instruction(j.at("instruction").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.room = room_from(j.at("room"));
    s.params = params_from(j.at("params"));
    s.target = placed_from(j.at("target"));
    for (const auto& d : j.at("distractors")) s.distractors.push_back(placed_from(d));
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene: ") + e.what());
  }
}

std::string serialize_room(const RoomLayout& room) { return room_json(room).dump(); }

std::vector<SceneSpec> load_scenes(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw std::runtime_error("cannot open " + jsonl.string());
  std::vector<SceneSpec> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(parse_scene(line));
  return out;
}

}  // namespace groundworld
