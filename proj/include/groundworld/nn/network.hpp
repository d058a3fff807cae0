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

// Vision-language actor-critic: conv stack on the frame, linear embedding
// of the one-hot instruction, a ReLU mixing layer, an LSTM cell and linear
// policy/value heads. Every step caches what its backward pass needs, so a
// rollout is differentiated by walking its caches in reverse.
//
// Batches are columns. A batch of B frames is stored stacked as a
// (B * side * side) x channels matrix, sample-major, which is also the
// channel-first byte order of each frame.

#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "groundworld/nn/config.hpp"
#include "groundworld/nn/params.hpp"

namespace groundworld::nn {

/// `x` is (B * side^2 x channels). Rows of `cols`: one conv patch per output
/// pixel (sample-major); columns: taps in
/// (channel, ky, kx) order.
template <typename S>
void im2col(const MatX<S>& x, int batch, int side, const ConvSpec& spec, MatX<S>& cols);

/// Adjoint of im2col: scatters patch gradients back onto the input map.
template <typename S>
void col2im(const MatX<S>& dcols, int batch, int side, const ConvSpec& spec, MatX<S>& dx);

/// Recurrent state, one column per batch entry.
template <typename S>
struct LstmState {
  MatX<S> h;
  MatX<S> c;

  static LstmState zeros(int hidden, int batch) {
    return {MatX<S>::Zero(hidden, batch), MatX<S>::Zero(hidden, batch)};
  }
};

/// Everything one forward step leaves behind for backward.
template <typename S>
struct StepCache {
  int batch = 0;
  MatX<S> input;                              ///< stacked frames in [0, 1]
  std::array<MatX<S>, kConvLayers> conv_out;  ///< post-ReLU maps, stacked
  MatX<S> language_in;                        ///< one-hot, (L x B)
  MatX<S> features;                           ///< flattened conv output, (F x B)
  MatX<S> language;                           ///< (Dl x B)
  MatX<S> mix;                                ///< post-ReLU, (Dm x B)
  MatX<S> h_prev, c_prev;                     ///< recurrent input after masking
  MatX<S> gates;                              ///< activated i, f, g, o, (4H x B)
  MatX<S> c, tanh_c, h;
  MatX<S> logits, probs;                      ///< (A x B)
  MatX<S> value;                              ///< (1 x B)
};

template <typename S>
class Network {
 public:
  Network(NetConfig cfg, ParamSet<S> params);
  Network(const NetConfig& cfg, std::uint64_t seed);

  const NetConfig& config() const noexcept { return cfg_; }
  ParamSet<S>& params() noexcept { return params_; }
  const ParamSet<S>& params() const noexcept { return params_; }

  /// One step for a batch. `frames` is (3 * side^2 x B) channel-first in
  /// [0, 1]; `language` is (L x B). Throws std::runtime_error on non-finite
  /// outputs.
  StepCache<S> forward(const MatX<S>& frames, const MatX<S>& language, const LstmState<S>& state) const;

  /// Accumulates parameter gradients of one step into `grads`. Inputs are
  /// loss gradients w.r.t. logits, value, and this step's h and c coming
  /// from the future. Returns the gradient w.r.t. the step's (masked)
  /// recurrent input.
  LstmState<S> backward(const StepCache<S>& cache, const MatX<S>& dlogits, const MatX<S>& dvalue,
                        const LstmState<S>& dnext, ParamSet<S>& grads) const;

 private:
  NetConfig cfg_;
  ParamSet<S> params_;
};

/// Column-wise softmax with max subtraction.
template <typename S>
MatX<S> softmax_columns(const MatX<S>& logits);

/// Frame bytes (channel-first) to a [0, 1] column.
template <typename S>
VecX<S> frame_column(std::span<const std::uint8_t> bytes);

extern template class Network<float>;
extern template class Network<double>;

}  // namespace groundworld::nn
