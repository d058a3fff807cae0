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

#include "groundworld/nn/params.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>

namespace groundworld::nn {

template <typename S>
int ParamSet<S>::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

template <typename S>
ParamSet<S> ParamSet<S>::zeros(const NetConfig& cfg) {
  ParamSet p;
  auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols) {
    p.names.push_back(std::move(name));
    p.tensors.push_back(MatX<S>::Zero(rows, cols));
  };
  for (int l = 0; l < kConvLayers; ++l) {
    add(fmt::format("conv{}.weight", l + 1), cfg.convs[l].out_channels, cfg.convs[l].taps());
    add(fmt::format("conv{}.bias", l + 1), cfg.convs[l].out_channels, 1);
  }
  const int H = cfg.hidden;
  add("language.weight", cfg.language_dim, cfg.language_in);
  add("language.bias", cfg.language_dim, 1);
  add("mix.weight", cfg.mix_dim, cfg.mix_in());
  add("mix.bias", cfg.mix_dim, 1);
  add("lstm.weight_input", 4 * H, cfg.mix_dim);
  add("lstm.weight_hidden", 4 * H, H);
  add("lstm.bias", 4 * H, 1);
  add("actor.weight", cfg.actions, H);
  add("actor.bias", cfg.actions, 1);
  add("critic.weight", 1, H);
  add("critic.bias", 1, 1);
  return p;
}

template <typename S>
ParamSet<S> ParamSet<S>::zeros_like() const {
  ParamSet p;
  p.names = names;
  for (const auto& t : tensors) p.tensors.push_back(MatX<S>::Zero(t.rows(), t.cols()));
  return p;
}

template <typename S>
void ParamSet<S>::set_zero() {
  for (auto& t : tensors) t.setZero();
}

template <typename S>
std::int64_t ParamSet<S>::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

template <typename S>
S ParamSet<S>::squared_norm() const {
  S n = 0;
  for (const auto& t : tensors) n += t.squaredNorm();
  return n;
}

template <typename S>
void ParamSet<S>::scale(S factor) {
  for (auto& t : tensors) t *= factor;
}

template <typename S>
void ParamSet<S>::axpy(S alpha, const ParamSet& other) {
  for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i] += alpha * other.tensors[i];
}

template <typename S>
ParamSet<S> init_params(const NetConfig& cfg, std::uint64_t seed, double actor_scale) {
  cfg.validate();
  ParamSet<S> p = ParamSet<S>::zeros(cfg);
  std::mt19937_64 rng(seed);
  auto fill = [&](int slot_index, double fan_in, double scale) {
    const double bound = scale / std::sqrt(fan_in);
    std::uniform_real_distribution<double> u(-bound, bound);
    auto& t = p[slot_index];
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = static_cast<S>(u(rng));
  };
  for (int l = 0; l < kConvLayers; ++l) fill(slot::conv_w(l), cfg.convs[l].taps(), 1.0);
  fill(slot::kLangW, cfg.language_in, 1.0);
  fill(slot::kMixW, cfg.mix_in(), 1.0);
  fill(slot::kLstmWx, cfg.mix_dim, 1.0);
  fill(slot::kLstmWh, cfg.hidden, 1.0);
  fill(slot::kActorW, cfg.hidden, actor_scale);
  fill(slot::kCriticW, cfg.hidden, 1.0);
  p[slot::kLstmB].middleRows(cfg.hidden, cfg.hidden).setConstant(S(1));
  return p;
}

template <typename S>
std::uint64_t param_hash(const ParamSet<S>& params) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (int i = 0; i < params.count(); ++i) {
    mix(params.names[i].data(), params.names[i].size());
    const std::int64_t shape[2] = {params[i].rows(), params[i].cols()};
    mix(shape, sizeof shape);
    mix(params[i].data(), sizeof(S) * static_cast<std::size_t>(params[i].size()));
  }
  return h;
}

template struct ParamSet<float>;
template struct ParamSet<double>;
template ParamSet<float> init_params<float>(const NetConfig&, std::uint64_t, double);
template ParamSet<double> init_params<double>(const NetConfig&, std::uint64_t, double);
template std::uint64_t param_hash<float>(const ParamSet<float>&);
template std::uint64_t param_hash<double>(const ParamSet<double>&);

}  // namespace groundworld::nn
