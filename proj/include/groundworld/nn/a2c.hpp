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

// Synchronous advantage actor-critic over n-step rollouts of B parallel
// environments, with backpropagation through time inside the rollout.
//
// Loss, averaged over the T * B samples:
//   -log pi(a_t|s_t) * A_t + c_v * (R_t - V(s_t))^2 - c_e * H(pi(.|s_t))
// R_t is the discounted return bootstrapped by V(s_T) unless the episode
// ended; A_t = R_t - V(s_t) is treated as a constant.

#pragma once

#include <vector>

#include "groundworld/nn/network.hpp"

namespace groundworld::nn {

struct A2CConfig {
  double gamma = 0.99;
  int n_step = 20;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double max_grad_norm = 0.5;
  double learning_rate = 2.5e-4;
  double rms_decay = 0.99;
  double rms_eps = 1e-5;
  int workers = 1;  ///< parallel environments per rollout

  /// Throws std::invalid_argument unless gamma is in (0, 1) and the rest is
  /// positive.
  void validate() const;
};

/// T steps of B environments. `masks(t, b)` is 0 when environment b starts
/// a new episode at step t (its recurrent state is cleared), else 1.
/// Frames and language are needed only to re-run the forward pass; the
/// trainer keeps the caches from acting and leaves them empty.
template <typename S>
struct Rollout {
  std::vector<MatX<S>> frames;    ///< per step, (3 * side^2 x B)
  std::vector<MatX<S>> language;  ///< per step, (L x B)
  std::vector<std::vector<int>> actions;
  MatX<S> rewards;  ///< (T x B)
  MatX<S> dones;    ///< (T x B), 1 when the episode ended at step t
  MatX<S> masks;    ///< (T x B)
  LstmState<S> initial;
  VecX<S> bootstrap;  ///< V(s_T) per environment, held constant

  int steps() const noexcept { return static_cast<int>(actions.size()); }
  int batch() const noexcept { return static_cast<int>(rewards.cols()); }
};

/// R_t = r_t + gamma * (1 - done_t) * R_{t+1}, R_T = bootstrap.
template <typename S>
MatX<S> discounted_returns(const MatX<S>& rewards, const MatX<S>& dones, const VecX<S>& bootstrap, S gamma);

/// Recurrent state entering a step: state * mask, column-wise.
template <typename S>
LstmState<S> masked(const LstmState<S>& state, const Eigen::Ref<const VecX<S>>& mask);

/// Forward pass over the rollout.
template <typename S>
std::vector<StepCache<S>> unroll(const Network<S>& net, const Rollout<S>& rollout);

template <typename S>
struct LossTerms {
  S policy = 0;   ///< mean of -log pi(a) * A
  S value = 0;    ///< mean of (R - V)^2, before the coefficient
  S entropy = 0;  ///< mean policy entropy
  S total = 0;
};

template <typename S>
S entropy(const Eigen::Ref<const VecX<S>>& probs);

template <typename S>
LossTerms<S> a2c_loss(const std::vector<StepCache<S>>& caches, const Rollout<S>& rollout,
                      const MatX<S>& returns, const MatX<S>& advantages, const A2CConfig& cfg);

/// Same loss; adds its parameter gradient into `grads`.
template <typename S>
LossTerms<S> a2c_backward(const Network<S>& net, const std::vector<StepCache<S>>& caches,
                          const Rollout<S>& rollout, const MatX<S>& returns, const MatX<S>& advantages,
                          const A2CConfig& cfg, ParamSet<S>& grads);

/// Scales `grads` to global L2 norm `max_norm` when above it. Returns the
/// norm before clipping.
template <typename S>
S clip_grad_norm(ParamSet<S>& grads, S max_norm);

/// v <- rho v + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(v) + eps)
template <typename S>
class RmsProp {
 public:
  RmsProp(const ParamSet<S>& like, const A2CConfig& cfg);
  void step(ParamSet<S>& params, const ParamSet<S>& grads);
  ParamSet<S>& square_avg() noexcept { return square_avg_; }
  const ParamSet<S>& square_avg() const noexcept { return square_avg_; }

 private:
  ParamSet<S> square_avg_;
  S lr_, rho_, eps_;
};

}  // namespace groundworld::nn
