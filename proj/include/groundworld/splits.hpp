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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundworld/types.hpp"

namespace groundworld {

enum class SplitLabel : std::uint8_t { Train, Test };
enum class SplitFilter : std::uint8_t { Train, Test, All };

std::string_view name(SplitLabel l);
std::string_view name(SplitFilter f);
std::optional<SplitFilter> parse_split_filter(std::string_view token);

/// Shape x concept grid. Concept is a Determiner (D table) or a
/// Preposition (P table), indexed by enum id.
class SplitTable {
 public:
  using Grid = std::array<std::array<SplitLabel, 8>, 5>;

  SplitTable() = default;
  explicit SplitTable(Grid grid) : grid_(grid) {}

  SplitLabel label(Shape shape, int concept_id) const { return grid_.at(id(shape)).at(concept_id); }
  const Grid& grid() const noexcept { return grid_; }
  int test_cells() const noexcept;
  double test_fraction() const noexcept { return test_cells() / 40.0; }

  /// Held-out cells for the Determiner environment.
  static SplitTable determiner_default();
  /// Held-out cells for the Preposition environment.
  static SplitTable preposition_default();

  /// CSV: header row of concept names, then one row per shape
  /// ("capsule,Test,Train,..."). Throws std::runtime_error on malformed input.
  static SplitTable load_csv(const std::filesystem::path& path);
  std::string to_csv(bool prepositions) const;

  friend bool operator==(const SplitTable&, const SplitTable&) = default;

 private:
  Grid grid_{};
};

/// Which object's shape indexes the preposition table for P and DP.
enum class ShapeKey : std::uint8_t { ObjectA, ObjectB };

struct SplitTables {
  SplitTable determiner = SplitTable::determiner_default();
  SplitTable preposition = SplitTable::preposition_default();
  ShapeKey preposition_key = ShapeKey::ObjectA;

  /// Loads d_split.csv and p_split.csv from a directory.
  static SplitTables load(const std::filesystem::path& dir);
};

/// D keys on (shape, determiner); P and DP key on (Object A shape, preposition).
SplitLabel membership(const Instruction& instr, const SplitTables& tables = {});

bool passes(SplitFilter filter, SplitLabel label) noexcept;

// ---------------------------------------------------------------------------
// Curriculum schedules

struct CurriculumStage {
  std::string name;
  std::vector<Determiner> determiners;
  std::vector<Preposition> prepositions;
  std::int64_t episode_cap = 5'000'000;
};

struct CurriculumSchedule {
  std::vector<CurriculumStage> stages;
  double criterion = 0.8;
  int window = 1000;

  /// "8D", "4D->8D", "2D->4D->8D", "8P", "4P->8P", "2P->4P->8P", "DP".
  static CurriculumSchedule preset(std::string_view name);
  /// Throws std::invalid_argument unless subsets are non-empty and strictly
  /// nested stage over stage.
  void validate() const;
  std::string label() const;
};

std::vector<Determiner> determiner_subset(int size);
std::vector<Preposition> preposition_subset(int size);

struct EpisodeRecord {
  bool perfect = false;  ///< success with total episode reward exactly +10
};

/// Criterion-gated stage tracker. Advances when at least
/// ceil(criterion * window) of the last `window` episodes of the current
/// stage are perfect; never regresses.
class CurriculumTracker {
 public:
  explicit CurriculumTracker(CurriculumSchedule schedule);

  /// Returns true when this episode completed the current stage.
  bool record(const EpisodeRecord& episode);

  int stage() const noexcept { return stage_; }
  bool completed() const noexcept { return stage_ >= stage_count(); }
  bool cap_reached() const noexcept;
  int stage_count() const noexcept { return static_cast<int>(schedule_.stages.size()); }
  const CurriculumSchedule& schedule() const noexcept { return schedule_; }
  /// Episodes spent in each finished stage, in order.
  const std::vector<std::int64_t>& stage_episode_counts() const noexcept { return finished_; }
  std::int64_t episodes_in_stage() const noexcept { return in_stage_; }
  double window_success() const noexcept;

 private:
  CurriculumSchedule schedule_;
  int stage_ = 0;
  std::int64_t in_stage_ = 0;
  std::vector<bool> window_;
  std::size_t head_ = 0;
  int perfect_in_window_ = 0;
  std::vector<std::int64_t> finished_;
};

struct StageStatus {
  int stage = 0;
  bool completed = false;
  std::vector<std::int64_t> stage_episode_counts;
};

/// Replays an episode history through a fresh tracker.
StageStatus stage_for(std::span<const EpisodeRecord> history, const CurriculumSchedule& schedule);

}  // namespace groundworld
