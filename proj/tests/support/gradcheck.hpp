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

// Finite-difference check of the full A2C loss on the miniature network.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "groundworld/nn/a2c.hpp"

namespace groundworld::testing {

struct SlotError {
  std::string name;
  double relative = 0.0;  ///< worst |num - an| / (1e-6 + |num|) over the slot
  double largest = 0.0;   ///< largest |num| seen, to spot dead slots
};

/// Rollout of T steps and B environments with an episode boundary, random
/// rewards and a random initial state.
inline nn::Rollout<double> random_rollout(const nn::NetConfig& cfg, int T, int B, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const int side = cfg.frame_size;
  nn::Rollout<double> r;
  r.rewards = nn::MatX<double>::Zero(T, B);
  r.dones = nn::MatX<double>::Zero(T, B);
  r.masks = nn::MatX<double>::Ones(T, B);
  r.dones(1, 0) = 1;
  r.masks(2, 0) = 0;
  for (int t = 0; t < T; ++t) {
    nn::MatX<double> f(3 * side * side, B);
    for (Eigen::Index k = 0; k < f.size(); ++k) f.data()[k] = 0.5 + u(rng);
    nn::MatX<double> l = nn::MatX<double>::Zero(cfg.language_in, B);
    for (int b = 0; b < B; ++b) l((t + b) % cfg.language_in, b) = 1;
    r.frames.push_back(f);
    r.language.push_back(l);
    std::vector<int> acts;
    for (int b = 0; b < B; ++b) {
      acts.push_back((t + 2 * b) % cfg.actions);
      r.rewards(t, b) = u(rng);
    }
    r.actions.push_back(acts);
  }
  r.initial.h = nn::MatX<double>::NullaryExpr(cfg.hidden, B, [&] { return 0.6 * u(rng); });
  r.initial.c = nn::MatX<double>::NullaryExpr(cfg.hidden, B, [&] { return 0.6 * u(rng); });
  r.bootstrap = nn::VecX<double>::Constant(B, 0.2);
  return r;
}

/// Central differences with step 1e-6 against the analytic gradient of the
/// total loss, per parameter tensor. Entries whose absolute disagreement is
/// below `floor` are treated as agreeing.
inline std::vector<SlotError> gradient_check(std::uint64_t seed, double floor = 1e-10) {
  const nn::NetConfig cfg = nn::NetConfig::miniature();
  nn::Network<double> net(cfg, seed);
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < net.params().count(); ++i)
    for (Eigen::Index j = 0; j < net.params()[i].size(); ++j) net.params()[i].data()[j] += 0.3 * u(rng);
  // Keep the tiny convolutions out of the dead ReLU regime.
  for (int l = 0; l < nn::kConvLayers; ++l) net.params()[nn::slot::conv_b(l)].array() += 0.3;

  const int T = 4, B = 2;
  const nn::Rollout<double> r = random_rollout(cfg, T, B, rng);
  nn::A2CConfig ac;
  ac.entropy_coef = 0.1;
  const auto caches = nn::unroll(net, r);
  const nn::MatX<double> R = nn::discounted_returns<double>(r.rewards, r.dones, r.bootstrap, 0.99);
  nn::MatX<double> V(T, B);
  for (int t = 0; t < T; ++t) V.row(t) = caches[static_cast<std::size_t>(t)].value;
  const nn::MatX<double> A = R - V;
  auto grads = net.params().zeros_like();
  nn::a2c_backward(net, caches, r, R, A, ac, grads);

  std::vector<SlotError> out;
  const double h = 1e-6;
  for (int i = 0; i < net.params().count(); ++i) {
    SlotError e{net.params().names[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < net.params()[i].size(); ++j) {
      double& p = net.params()[i].data()[j];
      const double orig = p;
      p = orig + h;
      const double lp = nn::a2c_loss(nn::unroll(net, r), r, R, A, ac).total;
      p = orig - h;
      const double lm = nn::a2c_loss(nn::unroll(net, r), r, R, A, ac).total;
      p = orig;
      const double num = (lp - lm) / (2 * h), an = grads[i].data()[j];
      if (std::abs(num - an) > floor) e.relative = std::max(e.relative, std::abs(num - an) / (1e-6 + std::abs(num)));
      e.largest = std::max(e.largest, std::abs(num));
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace groundworld::testing
