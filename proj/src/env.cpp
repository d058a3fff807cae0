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

#include "groundworld/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace groundworld {

std::string_view name(Action a) {
  switch (a) {
    case Action::Forward:
      return "forward";
    case Action::Backward:
      return "backward";
    case Action::TurnLeft:
      return "turn_left";
    case Action::TurnRight:
      return "turn_right";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view token) {
  for (Action a : kAllActions)
    if (name(a) == token) return a;
  return std::nullopt;
}

std::string_view name(Outcome o) {
  switch (o) {
    case Outcome::Running:
      return "running";
    case Outcome::Success:
      return "success";
    case Outcome::WrongTarget:
      return "wrong_target";
    case Outcome::Timeout:
      return "timeout";
  }
  return "?";
}

TriggerBox trigger_box(const Vec3& anchor, const RoomLayout& room, double margin) {
  const double half = 0.5 * room.block_size() + margin;
  return {anchor.x() - half, anchor.x() + half, anchor.z() - half, anchor.z() + half};
}

Env::Env(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.grammar.validate();
  cfg_.render.camera.validate();
  if (cfg_.t_max < 1) throw std::invalid_argument("t_max must be positive");
}

void Env::set_subsets(std::vector<Determiner> determiners, std::vector<Preposition> prepositions) {
  cfg_.grammar.determiners = std::move(determiners);
  cfg_.grammar.prepositions = std::move(prepositions);
  cfg_.grammar.validate();
  pool_.reset();
}

const InstructionPool& Env::pool() {
  if (!pool_) pool_ = std::make_unique<InstructionPool>(cfg_.grammar, cfg_.split, cfg_.tables);
  return *pool_;
}

const EpisodeState& Env::state() const {
  if (!state_) throw std::logic_error("no episode: call reset first");
  return *state_;
}

Observation Env::observe() const {
  const auto& s = state();
  return {render(world_, s.pose, cfg_.render.camera), encoded_, instruction_to_text(s.scene.instruction)};
}

StepResult Env::reset(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Instruction instr = pool().sample(rng);
  SceneConfig scene_cfg = cfg_.scene;
  scene_cfg.vocab = cfg_.grammar;

  EpisodeState s;
  s.seed = seed;
  s.scene = build_scene(instr, rng(), scene_cfg);
  s.pose = s.scene.room.spawn;

  triggers_.clear();
  for (const auto* opt : s.scene.options())
    triggers_.push_back(trigger_box(s.scene.room.anchors.at(opt->location), s.scene.room, cfg_.trigger_margin));

  if (cfg_.random_spawn) {
    const auto& room = s.scene.room;
    const double r = cfg_.agent_radius;
    std::uniform_real_distribution<double> ux(r, room.width - r), uz(r, room.depth - r),
        uh(0.0, 2.0 * std::numbers::pi);
    for (;;) {
      const Vec3 p(ux(rng), 0.0, uz(rng));
      if (std::none_of(triggers_.begin(), triggers_.end(), [&](const TriggerBox& t) { return t.contains(p); })) {
        s.pose = {p, normalize_heading(uh(rng))};
        break;
      }
    }
  }

  state_ = std::move(s);
  world_ = build_world(state_->scene, cfg_.render);
  encoded_ = encode(instr);
  return {observe(), 0.0, false, {}};
}

StepResult Env::step(Action action) {
  if (!state_) throw std::logic_error("step before reset");
  EpisodeState& s = *state_;
  if (s.terminated()) throw std::logic_error("episode_done");

  StepInfo info;
  const double th = s.pose.heading;
  const Vec3 forward(std::sin(th), 0.0, std::cos(th));
  const double turn = cfg_.turn_deg * std::numbers::pi / 180.0;
  switch (action) {
    case Action::TurnLeft:
      s.pose.heading = normalize_heading(th + turn);
      break;
    case Action::TurnRight:
      s.pose.heading = normalize_heading(th - turn);
      break;
    case Action::Forward:
    case Action::Backward: {
      const double sign = action == Action::Forward ? 1.0 : -1.0;
      Vec3 p = s.pose.position + sign * cfg_.step_size * forward;
      const auto& room = s.scene.room;
      const double r = cfg_.agent_radius;
      const Vec3 clamped(std::clamp(p.x(), r, room.width - r), p.y(), std::clamp(p.z(), r, room.depth - r));
      info.hit_wall = clamped != p;
      s.pose.position = clamped;
      break;
    }
  }
  ++s.step;

  double reward = info.hit_wall ? reward::kWall : 0.0;
  for (std::size_t i = 0; i < triggers_.size(); ++i)
    if (triggers_[i].contains(s.pose.position)) {
      info.option = static_cast<int>(i);
      break;
    }
  if (info.option == 0) {
    s.outcome = Outcome::Success;
    reward = reward::kTarget;
  } else if (info.option > 0) {
    s.outcome = Outcome::WrongTarget;
    reward = reward::kWrongTarget;
  } else if (s.step >= cfg_.t_max) {
    s.outcome = Outcome::Timeout;
    reward = reward::kTimeout;
  }
  info.outcome = s.outcome;
  s.total_reward += reward;
  return {observe(), reward, s.terminated(), info};
}

EpisodeSummary summarize(const EpisodeState& state, int stage) {
  return {state.seed,  state.scene.kind, stage, instruction_to_text(state.scene.instruction),
          state.outcome, state.step,     state.total_reward};
}

std::string episode_csv_header() { return "seed,env_kind,stage,instruction,outcome,steps,reward"; }

std::string episode_csv_row(const EpisodeSummary& e) {
  return fmt::format("{},{},{},{},{},{},{}", e.seed, name(e.kind), e.stage, e.instruction, name(e.outcome),
                     e.steps, e.reward);
}

double success_window(std::span<const EpisodeSummary> history, int window) {
  if (history.empty()) throw std::invalid_argument("success window over an empty history");
  if (window < 1) throw std::invalid_argument("window must be positive");
  const std::size_t n = std::min(history.size(), static_cast<std::size_t>(window));
  const auto tail = history.last(n);
  const auto perfect = std::count_if(tail.begin(), tail.end(), [](const EpisodeSummary& e) { return e.perfect(); });
  return static_cast<double>(perfect) / static_cast<double>(n);
}

}  // namespace groundworld
