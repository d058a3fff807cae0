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

#include "groundworld/nn/a2c.hpp"

#include <cmath>
#include <stdexcept>

namespace groundworld::nn {

void A2CConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (n_step < 1 || workers < 1) throw std::invalid_argument("n_step and workers must be positive");
  if (!(learning_rate > 0.0) || !(rms_eps > 0.0) || !(rms_decay > 0.0 && rms_decay < 1.0))
    throw std::invalid_argument("bad optimizer settings");
  if (value_coef < 0.0 || entropy_coef < 0.0 || !(max_grad_norm > 0.0))
    throw std::invalid_argument("loss coefficients must be non-negative and the clip positive");
}

template <typename S>
MatX<S> discounted_returns(const MatX<S>& rewards, const MatX<S>& dones, const VecX<S>& bootstrap, S gamma) {
  MatX<S> out(rewards.rows(), rewards.cols());
  VecX<S> next = bootstrap;
  for (Eigen::Index t = rewards.rows() - 1; t >= 0; --t) {
    for (Eigen::Index b = 0; b < rewards.cols(); ++b)
      next[b] = rewards(t, b) + gamma * (S(1) - dones(t, b)) * next[b];
    out.row(t) = next.transpose();
  }
  return out;
}

template <typename S>
LstmState<S> masked(const LstmState<S>& state, const Eigen::Ref<const VecX<S>>& mask) {
  return {state.h * mask.asDiagonal(), state.c * mask.asDiagonal()};
}

template <typename S>
std::vector<StepCache<S>> unroll(const Network<S>& net, const Rollout<S>& rollout) {
  std::vector<StepCache<S>> caches;
  caches.reserve(static_cast<std::size_t>(rollout.steps()));
  LstmState<S> state = rollout.initial;
  for (int t = 0; t < rollout.steps(); ++t) {
    const VecX<S> mask = rollout.masks.row(t).transpose();
    caches.push_back(net.forward(rollout.frames[t], rollout.language[t], masked<S>(state, mask)));
    state = {caches.back().h, caches.back().c};
  }
  return caches;
}

template <typename S>
S entropy(const Eigen::Ref<const VecX<S>>& probs) {
  S h = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i)
    if (probs[i] > S(0)) h -= probs[i] * std::log(probs[i]);
  return h;
}

namespace {

// Loss terms plus, when requested, the gradients w.r.t. logits and values.
template <typename S>
LossTerms<S> loss_impl(const std::vector<StepCache<S>>& caches, const Rollout<S>& rollout,
                       const MatX<S>& returns, const MatX<S>& advantages, const A2CConfig& cfg,
                       std::vector<MatX<S>>* dlogits, std::vector<MatX<S>>* dvalues) {
  const int T = rollout.steps(), B = rollout.batch();
  const S n = S(T) * S(B);
  const S cv = static_cast<S>(cfg.value_coef), ce = static_cast<S>(cfg.entropy_coef);
  LossTerms<S> out;
  if (dlogits) dlogits->assign(static_cast<std::size_t>(T), MatX<S>());
  if (dvalues) dvalues->assign(static_cast<std::size_t>(T), MatX<S>());
  for (int t = 0; t < T; ++t) {
    const auto& k = caches[static_cast<std::size_t>(t)];
    MatX<S> dl(k.probs.rows(), B), dv(1, B);
    for (int b = 0; b < B; ++b) {
      const VecX<S> pi = k.probs.col(b);
      const int a = rollout.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
      const S adv = advantages(t, b);
      const S err = returns(t, b) - k.value(0, b);
      const S h = entropy<S>(pi);
      out.policy -= std::log(pi[a]) * adv;
      out.value += err * err;
      out.entropy += h;
      // d(-log pi_a)/dz = pi - e_a ;  dH/dz_j = -pi_j (log pi_j + H)
      VecX<S> g = pi * adv;
      g[a] -= adv;
      for (Eigen::Index j = 0; j < pi.size(); ++j) g[j] += ce * pi[j] * (std::log(pi[j]) + h);
      dl.col(b) = g / n;
      dv(0, b) = -S(2) * cv * err / n;
    }
    if (dlogits) (*dlogits)[static_cast<std::size_t>(t)] = std::move(dl);
    if (dvalues) (*dvalues)[static_cast<std::size_t>(t)] = std::move(dv);
  }
  out.policy /= n;
  out.value /= n;
  out.entropy /= n;
  out.total = out.policy + cv * out.value - ce * out.entropy;
  if (!std::isfinite(static_cast<double>(out.total))) throw std::runtime_error("non-finite A2C loss");
  return out;
}

}  // namespace

template <typename S>
LossTerms<S> a2c_loss(const std::vector<StepCache<S>>& caches, const Rollout<S>& rollout,
                      const MatX<S>& returns, const MatX<S>& advantages, const A2CConfig& cfg) {
  return loss_impl<S>(caches, rollout, returns, advantages, cfg, nullptr, nullptr);
}

template <typename S>
LossTerms<S> a2c_backward(const Network<S>& net, const std::vector<StepCache<S>>& caches,
                          const Rollout<S>& rollout, const MatX<S>& returns, const MatX<S>& advantages,
                          const A2CConfig& cfg, ParamSet<S>& grads) {
  std::vector<MatX<S>> dlogits, dvalues;
  const LossTerms<S> terms = loss_impl<S>(caches, rollout, returns, advantages, cfg, &dlogits, &dvalues);
  const int H = net.config().hidden, B = rollout.batch();
  LstmState<S> dnext = LstmState<S>::zeros(H, B);
  for (int t = rollout.steps() - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    const LstmState<S> dprev = net.backward(caches[st], dlogits[st], dvalues[st], dnext, grads);
    if (t > 0) dnext = masked<S>(dprev, rollout.masks.row(t).transpose());
  }
  return terms;
}

template <typename S>
S clip_grad_norm(ParamSet<S>& grads, S max_norm) {
  const S norm = std::sqrt(grads.squared_norm());
  if (norm > max_norm) grads.scale(max_norm / (norm + S(1e-6)));
  return norm;
}

template <typename S>
RmsProp<S>::RmsProp(const ParamSet<S>& like, const A2CConfig& cfg)
    : square_avg_(like.zeros_like()),
      lr_(static_cast<S>(cfg.learning_rate)),
      rho_(static_cast<S>(cfg.rms_decay)),
      eps_(static_cast<S>(cfg.rms_eps)) {}

template <typename S>
void RmsProp<S>::step(ParamSet<S>& params, const ParamSet<S>& grads) {
  for (int i = 0; i < params.count(); ++i) {
    auto v = square_avg_[i].array();
    const auto g = grads[i].array();
    v = rho_ * v + (S(1) - rho_) * g * g;
    params[i].array() -= lr_ * g / (v.sqrt() + eps_);
  }
}

#define GROUNDWORLD_A2C_INSTANTIATE(S)                                                                     \
  template MatX<S> discounted_returns<S>(const MatX<S>&, const MatX<S>&, const VecX<S>&, S);             \
  template LstmState<S> masked<S>(const LstmState<S>&, const Eigen::Ref<const VecX<S>>&);                \
  template std::vector<StepCache<S>> unroll<S>(const Network<S>&, const Rollout<S>&);                    \
  template S entropy<S>(const Eigen::Ref<const VecX<S>>&);                                               \
  template LossTerms<S> a2c_loss<S>(const std::vector<StepCache<S>>&, const Rollout<S>&, const MatX<S>&, \
                                    const MatX<S>&, const A2CConfig&);                                   \
  template LossTerms<S> a2c_backward<S>(const Network<S>&, const std::vector<StepCache<S>>&,             \
                                        const Rollout<S>&, const MatX<S>&, const MatX<S>&,               \
                                        const A2CConfig&, ParamSet<S>&);                                 \
  template S clip_grad_norm<S>(ParamSet<S>&, S);                                                         \
  template class RmsProp<S>;

GROUNDWORLD_A2C_INSTANTIATE(float)
GROUNDWORLD_A2C_INSTANTIATE(double)

}  // namespace groundworld::nn
