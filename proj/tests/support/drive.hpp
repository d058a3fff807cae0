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

// Scripted driving for environment checks.

#pragma once

#include <cmath>
#include <numbers>

#include "groundworld/env.hpp"

namespace groundworld::testing {

/// Turns toward `goal` and walks forward until the episode ends.
inline StepResult walk_to(Env& env, const Vec3& goal) {
  StepResult r;
  const double tol = 8.0 * std::numbers::pi / 180.0;
  while (!env.state().terminated()) {
    const Pose& p = env.state().pose;
    const double bearing = std::atan2(goal.x() - p.position.x(), goal.z() - p.position.z());
    const double diff = std::remainder(bearing - p.heading, 2.0 * std::numbers::pi);
    if (diff > tol)
      r = env.step(Action::TurnLeft);
    else if (diff < -tol)
      r = env.step(Action::TurnRight);
    else
      r = env.step(Action::Forward);
  }
  return r;
}

/// Faces -z from the spawn heading and walks into the wall until the step
/// limit. Returns the episode total.
inline double wall_until_timeout(Env& env) {
  for (int i = 0; i < 12; ++i) env.step(Action::TurnLeft);
  double total = env.state().total_reward;
  StepResult r;
  while (!r.done) {
    r = env.step(Action::Forward);
    total += r.reward;
  }
  return total;
}

}  // namespace groundworld::testing
