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
#include <vector>

#include <Eigen/Core>

#include "groundworld/types.hpp"

namespace groundworld::nn {

template <typename S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Unpadded 2-D convolution.
struct ConvSpec {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;

  int taps() const noexcept { return in_channels * kernel * kernel; }
  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

/// Output side of an unpadded convolution; 0 when the kernel does not fit.
constexpr int conv_out(int n, int kernel, int stride) noexcept {
  return n < kernel ? 0 : (n - kernel) / stride + 1;
}

inline constexpr int kConvLayers = 3;

struct NetConfig {
  int frame_size = 128;
  std::array<ConvSpec, kConvLayers> convs{{{3, 32, 8, 4}, {32, 64, 5, 2}, {64, 64, 2, 2}}};
  int language_in = 18;
  int language_dim = 128;
  int mix_dim = 256;
  int hidden = 256;
  int actions = 4;

  /// Feature-map side before each layer and after the last: {128, 31, 14, 7}.
  std::array<int, kConvLayers + 1> sides() const noexcept;
  int conv_features() const noexcept;
  int mix_in() const noexcept { return conv_features() + language_dim; }
  /// Throws std::invalid_argument on inconsistent channels or an empty map.
  void validate() const;

  /// Full-size agent for an environment kind.
  static NetConfig for_env(EnvKind kind, int frame_size = 128);
  /// Tiny network for finite-difference checks: 4x4 frames, k2 s1 convs.
  static NetConfig miniature();

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

}  // namespace groundworld::nn
