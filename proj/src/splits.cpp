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

#include "groundworld/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace groundworld {

namespace {

// Both published grids hold out the same diagonal pattern: shape row r is
// Test at concept columns r and r + 3.
SplitTable::Grid diagonal_grid() {
  SplitTable::Grid g{};
  for (auto& row : g) row.fill(SplitLabel::Train);
  for (int r = 0; r < 5; ++r) {
    g[r][r] = SplitLabel::Test;
    g[r][r + 3] = SplitLabel::Test;
  }
  return g;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

std::string_view name(SplitLabel l) { return l == SplitLabel::Train ? "train" : "test"; }

std::string_view name(SplitFilter f) {
  switch (f) {
    case SplitFilter::Train:
      return "train";
    case SplitFilter::Test:
      return "test";
    case SplitFilter::All:
      return "all";
  }
  return "?";
}

std::optional<SplitFilter> parse_split_filter(std::string_view token) {
  if (token == "train") return SplitFilter::Train;
  if (token == "test") return SplitFilter::Test;
  if (token == "all") return SplitFilter::All;
  return std::nullopt;
}

int SplitTable::test_cells() const noexcept {
  int n = 0;
  for (const auto& row : grid_)
    n += static_cast<int>(std::count(row.begin(), row.end(), SplitLabel::Test));
  return n;
}

SplitTable SplitTable::determiner_default() { return SplitTable(diagonal_grid()); }
SplitTable SplitTable::preposition_default() { return SplitTable(diagonal_grid()); }

SplitTable SplitTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open split table {}", path.string()));
  std::string line;
  auto skip = [](const std::string& l) {
    return l.starts_with('#') || l.find_first_not_of(" \t\r") == std::string::npos;
  };
  while (std::getline(in, line) && skip(line)) {
  }
  if (!in) throw std::runtime_error("split table: missing header");
  Grid grid{};
  std::array<bool, 5> seen{};
  int rows = 0;
  while (std::getline(in, line)) {
    if (skip(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 9)
      throw std::runtime_error(fmt::format("split table: expected 9 cells, got {}", cells.size()));
    auto shape = parse_shape(cells[0]);
    if (!shape) throw std::runtime_error(fmt::format("split table: unknown shape '{}'", cells[0]));
    if (seen[id(*shape)]) throw std::runtime_error("split table: duplicate shape row");
    seen[id(*shape)] = true;
    for (int c = 0; c < 8; ++c) {
      const std::string& v = cells[c + 1];
      if (v == "Train" || v == "train")
        grid[id(*shape)][c] = SplitLabel::Train;
      else if (v == "Test" || v == "test")
        grid[id(*shape)][c] = SplitLabel::Test;
      else
        throw std::runtime_error(fmt::format("split table: bad label '{}'", v));
    }
    ++rows;
  }
  if (rows != 5) throw std::runtime_error("split table: expected 5 shape rows");
  return SplitTable(grid);
}

std::string SplitTable::to_csv(bool prepositions) const {
  std::string out = "shape";
  for (int c = 0; c < 8; ++c) {
    out += ',';
    out += prepositions ? name(static_cast<Preposition>(c)) : name(static_cast<Determiner>(c));
  }
  out += '\n';
  for (Shape s : kAllShapes) {
    out += name(s);
    for (int c = 0; c < 8; ++c) out += label(s, c) == SplitLabel::Test ? ",Test" : ",Train";
    out += '\n';
  }
  return out;
}

SplitTables SplitTables::load(const std::filesystem::path& dir) {
  SplitTables t;
  t.determiner = SplitTable::load_csv(dir / "d_split.csv");
  t.preposition = SplitTable::load_csv(dir / "p_split.csv");
  return t;
}

SplitLabel membership(const Instruction& instr, const SplitTables& tables) {
  struct Visitor {
    const SplitTables& t;
    Shape keyed(const ObjectPhrase& a, const ObjectPhrase& b) const {
      return t.preposition_key == ShapeKey::ObjectA ? a.shape : b.shape;
    }
    SplitLabel operator()(const DInstruction& i) const {
      return t.determiner.label(i.obj.shape, id(i.det));
    }
    SplitLabel operator()(const PInstruction& i) const {
      return t.preposition.label(keyed(i.object_a, i.object_b), id(i.prep));
    }
    SplitLabel operator()(const DPInstruction& i) const {
      return t.preposition.label(keyed(i.object_a, i.object_b), id(i.prep));
    }
  };
  return std::visit(Visitor{tables}, instr);
}

bool passes(SplitFilter filter, SplitLabel label) noexcept {
  switch (filter) {
    case SplitFilter::Train:
      return label == SplitLabel::Train;
    case SplitFilter::Test:
      return label == SplitLabel::Test;
    case SplitFilter::All:
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

std::vector<Determiner> determiner_subset(int size) {
  using D = Determiner;
  switch (size) {
    case 2:
      return {D::A, D::This};
    case 4:
      return {D::A, D::Few, D::This, D::That};
    case 8:
      return {kAllDeterminers.begin(), kAllDeterminers.end()};
    default:
      throw std::invalid_argument(fmt::format("no default {}-determiner subset", size));
  }
}

std::vector<Preposition> preposition_subset(int size) {
  using P = Preposition;
  switch (size) {
    case 2:
      return {P::Above, P::Below};
    case 4:
      return {P::Above, P::Below, P::On, P::Beside};
    case 8:
      return {kAllPrepositions.begin(), kAllPrepositions.end()};
    default:
      throw std::invalid_argument(fmt::format("no default {}-preposition subset", size));
  }
}

CurriculumSchedule CurriculumSchedule::preset(std::string_view name) {
  const std::vector<Determiner> all_d(kAllDeterminers.begin(), kAllDeterminers.end());
  const std::vector<Preposition> all_p(kAllPrepositions.begin(), kAllPrepositions.end());
  CurriculumSchedule s;
  auto d_stage = [&](int n) {
    return CurriculumStage{fmt::format("{}D", n), determiner_subset(n), all_p};
  };
  auto p_stage = [&](int n) {
    return CurriculumStage{fmt::format("{}P", n), all_d, preposition_subset(n)};
  };
  if (name == "8D") {
    s.stages = {d_stage(8)};
  } else if (name == "4D->8D") {
    s.stages = {d_stage(4), d_stage(8)};
  } else if (name == "2D->4D->8D") {
    s.stages = {d_stage(2), d_stage(4), d_stage(8)};
  } else if (name == "8P") {
    s.stages = {p_stage(8)};
  } else if (name == "4P->8P") {
    s.stages = {p_stage(4), p_stage(8)};
  } else if (name == "2P->4P->8P") {
    s.stages = {p_stage(2), p_stage(4), p_stage(8)};
  } else if (name == "DP") {
    s.stages = {CurriculumStage{"DP", all_d, all_p}};
  } else {
    throw std::invalid_argument(fmt::format("unknown schedule '{}'", name));
  }
  return s;
}

void CurriculumSchedule::validate() const {
  if (stages.empty()) throw std::invalid_argument("schedule has no stages");
  if (window <= 0 || criterion <= 0.0 || criterion > 1.0)
    throw std::invalid_argument("schedule criterion/window out of range");
  auto subset_of = [](auto small, auto big) {
    std::sort(small.begin(), small.end());
    std::sort(big.begin(), big.end());
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
  };
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    if (s.determiners.empty() || s.prepositions.empty())
      throw std::invalid_argument(fmt::format("stage '{}' has an empty subset", s.name));
    if (i == 0) continue;
    const auto& prev = stages[i - 1];
    const bool nested = subset_of(prev.determiners, s.determiners) &&
                        subset_of(prev.prepositions, s.prepositions);
    const bool grows = s.determiners.size() + s.prepositions.size() >
                       prev.determiners.size() + prev.prepositions.size();
    if (!nested || !grows)
      throw std::invalid_argument(
          fmt::format("stage '{}' does not strictly extend '{}'", s.name, prev.name));
  }
}

std::string CurriculumSchedule::label() const {
  std::string out;
  for (const auto& s : stages) {
    if (!out.empty()) out += "->";
    out += s.name;
  }
  return out;
}

CurriculumTracker::CurriculumTracker(CurriculumSchedule schedule) : schedule_(std::move(schedule)) {
  schedule_.validate();
  window_.assign(static_cast<std::size_t>(schedule_.window), false);
}

bool CurriculumTracker::cap_reached() const noexcept {
  return !completed() && in_stage_ >= schedule_.stages[stage_].episode_cap;
}

double CurriculumTracker::window_success() const noexcept {
  const auto n = std::min<std::int64_t>(in_stage_, schedule_.window);
  return n == 0 ? 0.0 : static_cast<double>(perfect_in_window_) / static_cast<double>(n);
}

bool CurriculumTracker::record(const EpisodeRecord& episode) {
  if (completed()) return false;
  if (in_stage_ >= schedule_.window && window_[head_]) --perfect_in_window_;
  window_[head_] = episode.perfect;
  if (episode.perfect) ++perfect_in_window_;
  head_ = (head_ + 1) % window_.size();
  ++in_stage_;

  const int needed = static_cast<int>(std::ceil(schedule_.criterion * schedule_.window - 1e-9));
  if (perfect_in_window_ < needed) return false;

  finished_.push_back(in_stage_);
  ++stage_;
  in_stage_ = 0;
  head_ = 0;
  perfect_in_window_ = 0;
  std::fill(window_.begin(), window_.end(), false);
  return true;
}

StageStatus stage_for(std::span<const EpisodeRecord> history, const CurriculumSchedule& schedule) {
  CurriculumTracker tracker(schedule);
  for (const auto& e : history) tracker.record(e);
  return {tracker.stage(), tracker.completed(), tracker.stage_episode_counts()};
}

}  // namespace groundworld
