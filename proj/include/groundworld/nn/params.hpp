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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "groundworld/nn/config.hpp"

namespace groundworld::nn {

/// Fixed tensor slots of the agent. Conv layer l owns slots 2l and 2l+1.
namespace slot {
constexpr int conv_w(int l) { return 2 * l; }
constexpr int conv_b(int l) { return 2 * l + 1; }
inline constexpr int kLangW = 2 * kConvLayers;
inline constexpr int kLangB = kLangW + 1;
inline constexpr int kMixW = kLangW + 2;
inline constexpr int kMixB = kLangW + 3;
inline constexpr int kLstmWx = kLangW + 4;  ///< (4H x mix), gate blocks i, f, g, o
inline constexpr int kLstmWh = kLangW + 5;  ///< (4H x H)
inline constexpr int kLstmB = kLangW + 6;
inline constexpr int kActorW = kLangW + 7;
inline constexpr int kActorB = kLangW + 8;
inline constexpr int kCriticW = kLangW + 9;
inline constexpr int kCriticB = kLangW + 10;
inline constexpr int kCount = kLangW + 11;
}  // namespace slot

/// Named dense tensors; biases are column vectors.
template <typename S>
struct ParamSet {
  std::vector<std::string> names;
  std::vector<MatX<S>> tensors;

  MatX<S>& operator[](int i) { return tensors[static_cast<std::size_t>(i)]; }
  const MatX<S>& operator[](int i) const { return tensors[static_cast<std::size_t>(i)]; }
  int count() const noexcept { return static_cast<int>(tensors.size()); }
  /// Index of `name`, or -1.
  int find(const std::string& name) const;

  /// Zero tensors with the agent's names and shapes.
  static ParamSet zeros(const NetConfig& cfg);
  ParamSet zeros_like() const;
  void set_zero();

  std::int64_t scalar_count() const;
  S squared_norm() const;
  void scale(S factor);
  /// this += alpha * other
  void axpy(S alpha, const ParamSet& other);

  template <typename T>
  ParamSet<T> cast() const {
    ParamSet<T> out;
    out.names = names;
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<T>());
    return out;
  }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases, LSTM
/// forget-gate bias +1, actor weights scaled by `actor_scale`.
template <typename S>
ParamSet<S> init_params(const NetConfig& cfg, std::uint64_t seed, double actor_scale = 0.01);

/// FNV-1a over names, shapes and raw scalar bytes.
template <typename S>
std::uint64_t param_hash(const ParamSet<S>& params);

extern template struct ParamSet<float>;
extern template struct ParamSet<double>;

}  // namespace groundworld::nn
