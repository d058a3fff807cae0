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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "groundworld/grammar.hpp"
#include "groundworld/renderer.hpp"
#include "groundworld/scene.hpp"
#include "groundworld/splits.hpp"

namespace groundworld {

enum class Action : std::uint8_t { Forward, Backward, TurnLeft, TurnRight };
inline constexpr std::array kAllActions = {Action::Forward, Action::Backward, Action::TurnLeft,
                                           Action::TurnRight};
inline constexpr int kActionCount = 4;

std::string_view name(Action a);
std::optional<Action> parse_action(std::string_view token);

enum class Outcome : std::uint8_t { Running, Success, WrongTarget, Timeout };
std::string_view name(Outcome o);

namespace reward {
inline constexpr double kTarget = 10.0;
inline constexpr double kWrongTarget = -3.0;
inline constexpr double kWall = -1.0;
inline constexpr double kTimeout = -10.0;
}  // namespace reward

struct EnvConfig {
  /// Kind, distinctness rule and the active concept/attribute subsets.
  GrammarConfig grammar;
  SplitFilter split = SplitFilter::Train;
  SplitTables tables;
  SceneConfig scene;
  RenderConfig render;
  double step_size = 0.25;   ///< meters per Forward/Backward
  double turn_deg = 15.0;    ///< degrees per TurnLeft/TurnRight
  int t_max = 500;
  double trigger_margin = 0.3;  ///< block footprint inflation
  double agent_radius = 0.2;    ///< wall clearance
  bool random_spawn = false;

  EnvKind kind() const noexcept { return grammar.kind; }
};

struct Observation {
  Frame frame;
  EncodedInstruction instruction;
  std::string text;
};

struct StepInfo {
  Outcome outcome = Outcome::Running;
  bool hit_wall = false;
  int option = -1;  ///< index into SceneSpec::options() entered this step
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpisodeState {
  SceneSpec scene;
  Pose pose;
  int step = 0;
  double total_reward = 0.0;
  Outcome outcome = Outcome::Running;
  std::uint64_t seed = 0;

  bool terminated() const noexcept { return outcome != Outcome::Running; }
  /// Success with the episode reward exactly +10.
  bool perfect() const noexcept { return outcome == Outcome::Success && total_reward == reward::kTarget; }
};

/// Ground-plane trigger rectangle of one option.
struct TriggerBox {
  double x_min, x_max, z_min, z_max;
  bool contains(const Vec3& p) const noexcept {
    return p.x() >= x_min && p.x() <= x_max && p.z() >= z_min && p.z() <= z_max;
  }
};

TriggerBox trigger_box(const Vec3& anchor, const RoomLayout& room, double margin);

/// Single-owner episode state machine.
class Env {
 public:
  explicit Env(EnvConfig cfg);

  /// New scene and spawn. Identical seeds give identical episodes.
  StepResult reset(std::uint64_t seed);
  /// Throws std::logic_error before the first reset or after termination.
  StepResult step(Action action);

  /// Replaces the concept subsets (curriculum stage); effective on next reset.
  void set_subsets(std::vector<Determiner> determiners, std::vector<Preposition> prepositions);

  const EpisodeState& state() const;
  bool has_episode() const noexcept { return state_.has_value(); }
  const EnvConfig& config() const noexcept { return cfg_; }
  const InstructionPool& pool();
  Observation observe() const;

 private:
  EnvConfig cfg_;
  std::unique_ptr<InstructionPool> pool_;
  std::optional<EpisodeState> state_;
  WorldGeometry world_;
  EncodedInstruction encoded_;
  std::vector<TriggerBox> triggers_;  ///< aligned with SceneSpec::options()
};

struct EpisodeSummary {
  std::uint64_t seed = 0;
  EnvKind kind = EnvKind::D;
  int stage = 0;
  std::string instruction;
  Outcome outcome = Outcome::Running;
  int steps = 0;
  double reward = 0.0;

  bool perfect() const noexcept { return outcome == Outcome::Success && reward == reward::kTarget; }
};

EpisodeSummary summarize(const EpisodeState& state, int stage);
std::string episode_csv_header();
std::string episode_csv_row(const EpisodeSummary& e);

/// Fraction of perfect episodes among the last `window` (fewer when the
/// history is shorter). Throws std::invalid_argument on an empty history.
double success_window(std::span<const EpisodeSummary> history, int window = 1000);

}  // namespace groundworld
