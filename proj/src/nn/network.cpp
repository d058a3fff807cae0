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

#include "groundworld/nn/network.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>

namespace groundworld::nn {

// ---------------------------------------------------------------------------
// NetConfig

std::array<int, kConvLayers + 1> NetConfig::sides() const noexcept {
  std::array<int, kConvLayers + 1> out{};
  out[0] = frame_size;
  for (int l = 0; l < kConvLayers; ++l) out[l + 1] = conv_out(out[l], convs[l].kernel, convs[l].stride);
  return out;
}

int NetConfig::conv_features() const noexcept {
  const int side = sides()[kConvLayers];
  return convs[kConvLayers - 1].out_channels * side * side;
}

void NetConfig::validate() const {
  if (convs[0].in_channels != 3) throw std::invalid_argument("first conv must take 3 channels");
  for (int l = 1; l < kConvLayers; ++l)
    if (convs[l].in_channels != convs[l - 1].out_channels)
      throw std::invalid_argument(fmt::format("conv{} expects {} channels, gets {}", l + 1,
                                              convs[l].in_channels, convs[l - 1].out_channels));
  for (const auto& c : convs)
    if (c.kernel < 1 || c.stride < 1 || c.out_channels < 1) throw std::invalid_argument("bad conv spec");
  if (sides()[kConvLayers] < 1) throw std::invalid_argument(fmt::format("frame {} too small", frame_size));
  if (language_in < 1 || language_dim < 1 || mix_dim < 1 || hidden < 1 || actions < 1)
    throw std::invalid_argument("layer widths must be positive");
}

NetConfig NetConfig::for_env(EnvKind kind, int frame_size) {
  NetConfig cfg;
  cfg.frame_size = frame_size;
  cfg.language_in = vocab_sizes(kind).flat_size();
  cfg.validate();
  return cfg;
}

NetConfig NetConfig::miniature() {
  NetConfig cfg;
  cfg.frame_size = 4;
  cfg.convs = {{{3, 2, 2, 1}, {2, 3, 2, 1}, {3, 2, 2, 1}}};
  cfg.language_in = 3;
  cfg.language_dim = 2;
  cfg.mix_dim = 6;
  cfg.hidden = 8;
  cfg.actions = 4;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Convolution helpers

template <typename S>
void im2col(const MatX<S>& x, int batch, int side, const ConvSpec& spec, MatX<S>& cols) {
  const int k = spec.kernel, s = spec.stride;
  const int out = conv_out(side, k, s);
  const int hw = side * side, p = out * out;
  cols.resize(static_cast<Eigen::Index>(batch) * p, spec.taps());
  for (int c = 0; c < spec.in_channels; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        S* dst = cols.col((c * k + ky) * k + kx).data();
        const S* src = x.col(c).data();
        for (int b = 0; b < batch; ++b)
          for (int oy = 0; oy < out; ++oy) {
            const S* row = src + static_cast<std::ptrdiff_t>(b) * hw + (oy * s + ky) * side + kx;
            for (int ox = 0; ox < out; ++ox) *dst++ = row[ox * s];
          }
      }
}

template <typename S>
void col2im(const MatX<S>& dcols, int batch, int side, const ConvSpec& spec, MatX<S>& dx) {
  const int k = spec.kernel, s = spec.stride;
  const int out = conv_out(side, k, s);
  const int hw = side * side;
  dx.setZero(static_cast<Eigen::Index>(batch) * hw, spec.in_channels);
  for (int c = 0; c < spec.in_channels; ++c)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const S* src = dcols.col((c * k + ky) * k + kx).data();
        S* base = dx.col(c).data();
        for (int b = 0; b < batch; ++b)
          for (int oy = 0; oy < out; ++oy) {
            S* row = base + static_cast<std::ptrdiff_t>(b) * hw + (oy * s + ky) * side + kx;
            for (int ox = 0; ox < out; ++ox) row[ox * s] += *src++;
          }
      }
}

namespace {

template <typename S>
S sigmoid(S v) {
  return S(1) / (S(1) + std::exp(-v));
}

template <typename S>
void check_finite(const MatX<S>& m, const char* what) {
  if (!m.allFinite()) throw std::runtime_error(fmt::format("non-finite values in {}", what));
}

}  // namespace

template <typename S>
MatX<S> softmax_columns(const MatX<S>& logits) {
  MatX<S> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const auto z = logits.col(j).array() - logits.col(j).maxCoeff();
    out.col(j) = z.exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

template <typename S>
VecX<S> frame_column(std::span<const std::uint8_t> bytes) {
  VecX<S> v(static_cast<Eigen::Index>(bytes.size()));
  for (std::size_t i = 0; i < bytes.size(); ++i) v[static_cast<Eigen::Index>(i)] = S(bytes[i]) / S(255);
  return v;
}

// ---------------------------------------------------------------------------
// Network

template <typename S>
Network<S>::Network(NetConfig cfg, ParamSet<S> params) : cfg_(std::move(cfg)), params_(std::move(params)) {
  cfg_.validate();
  const auto expected = ParamSet<S>::zeros(cfg_);
  if (params_.count() != expected.count())
    throw std::invalid_argument("parameter set does not match the network layout");
  for (int i = 0; i < expected.count(); ++i)
    if (params_.names[i] != expected.names[i] || params_[i].rows() != expected[i].rows() ||
        params_[i].cols() != expected[i].cols())
      throw std::invalid_argument(fmt::format("tensor {} has shape {}x{}, expected {} {}x{}", params_.names[i],
                                              params_[i].rows(), params_[i].cols(), expected.names[i],
                                              expected[i].rows(), expected[i].cols()));
}

template <typename S>
Network<S>::Network(const NetConfig& cfg, std::uint64_t seed) : Network(cfg, init_params<S>(cfg, seed)) {}

template <typename S>
StepCache<S> Network<S>::forward(const MatX<S>& frames, const MatX<S>& language,
                                 const LstmState<S>& state) const {
  const int batch = static_cast<int>(frames.cols());
  const auto sides = cfg_.sides();
  const int hw0 = sides[0] * sides[0];
  if (frames.rows() != 3 * hw0 || language.rows() != cfg_.language_in || language.cols() != batch ||
      state.h.rows() != cfg_.hidden || state.h.cols() != batch)
    throw std::invalid_argument("forward: input shapes do not match the network");
  const int H = cfg_.hidden;

  StepCache<S> k;
  k.batch = batch;
  // Stack the channel-first columns into a (B*hw) x 3 map.
  k.input.resize(static_cast<Eigen::Index>(batch) * hw0, 3);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < 3; ++c) k.input.col(c).segment(b * hw0, hw0) = frames.col(b).segment(c * hw0, hw0);

  MatX<S> cols;
  const MatX<S>* x = &k.input;
  for (int l = 0; l < kConvLayers; ++l) {
    im2col(*x, batch, sides[l], cfg_.convs[l], cols);
    MatX<S>& y = k.conv_out[l];
    y.noalias() = cols * params_[slot::conv_w(l)].transpose();
    y.rowwise() += params_[slot::conv_b(l)].col(0).transpose();
    y = y.cwiseMax(S(0));
    x = &y;
  }
  const int p = sides[kConvLayers] * sides[kConvLayers];
  const int ch = cfg_.convs[kConvLayers - 1].out_channels;
  k.features.resize(static_cast<Eigen::Index>(ch) * p, batch);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < ch; ++c) k.features.col(b).segment(c * p, p) = k.conv_out[kConvLayers - 1].col(c).segment(b * p, p);

  k.language_in = language;
  k.language = params_[slot::kLangW] * language;
  k.language.colwise() += params_[slot::kLangB].col(0);

  const MatX<S>& wm = params_[slot::kMixW];
  const int F = cfg_.conv_features();
  k.mix.noalias() = wm.leftCols(F) * k.features;
  k.mix.noalias() += wm.rightCols(cfg_.language_dim) * k.language;
  k.mix.colwise() += params_[slot::kMixB].col(0);
  k.mix = k.mix.cwiseMax(S(0));

  k.h_prev = state.h;
  k.c_prev = state.c;
  k.gates.noalias() = params_[slot::kLstmWx] * k.mix;
  k.gates.noalias() += params_[slot::kLstmWh] * k.h_prev;
  k.gates.colwise() += params_[slot::kLstmB].col(0);
  auto g = k.gates.array();
  g.topRows(2 * H) = g.topRows(2 * H).unaryExpr([](S v) { return sigmoid(v); });
  g.middleRows(2 * H, H) = g.middleRows(2 * H, H).tanh();
  g.bottomRows(H) = g.bottomRows(H).unaryExpr([](S v) { return sigmoid(v); });

  const auto i = k.gates.topRows(H).array();
  const auto f = k.gates.middleRows(H, H).array();
  const auto gg = k.gates.middleRows(2 * H, H).array();
  const auto o = k.gates.bottomRows(H).array();
  k.c = (f * k.c_prev.array() + i * gg).matrix();
  k.tanh_c = k.c.array().tanh().matrix();
  k.h = (o * k.tanh_c.array()).matrix();

  k.logits = params_[slot::kActorW] * k.h;
  k.logits.colwise() += params_[slot::kActorB].col(0);
  k.probs = softmax_columns<S>(k.logits);
  k.value = params_[slot::kCriticW] * k.h;
  k.value.colwise() += params_[slot::kCriticB].col(0);

  check_finite(k.probs, "policy");
  check_finite(k.value, "value");
  return k;
}

template <typename S>
LstmState<S> Network<S>::backward(const StepCache<S>& k, const MatX<S>& dlogits, const MatX<S>& dvalue,
                                  const LstmState<S>& dnext, ParamSet<S>& grads) const {
  const int H = cfg_.hidden;
  const int F = cfg_.conv_features();
  const int batch = k.batch;

  // Heads.
  grads[slot::kActorW].noalias() += dlogits * k.h.transpose();
  grads[slot::kActorB] += dlogits.rowwise().sum();
  grads[slot::kCriticW].noalias() += dvalue * k.h.transpose();
  grads[slot::kCriticB] += dvalue.rowwise().sum();
  MatX<S> dh = dnext.h;
  dh.noalias() += params_[slot::kActorW].transpose() * dlogits;
  dh.noalias() += params_[slot::kCriticW].transpose() * dvalue;

  // LSTM cell.
  const auto i = k.gates.topRows(H).array();
  const auto f = k.gates.middleRows(H, H).array();
  const auto g = k.gates.middleRows(2 * H, H).array();
  const auto o = k.gates.bottomRows(H).array();
  const auto tc = k.tanh_c.array();
  const MatX<S> dc = (dh.array() * o * (S(1) - tc * tc) + dnext.c.array()).matrix();
  MatX<S> dgates(4 * H, batch);
  dgates.topRows(H) = (dc.array() * g * i * (S(1) - i)).matrix();
  dgates.middleRows(H, H) = (dc.array() * k.c_prev.array() * f * (S(1) - f)).matrix();
  dgates.middleRows(2 * H, H) = (dc.array() * i * (S(1) - g * g)).matrix();
  dgates.bottomRows(H) = (dh.array() * tc * o * (S(1) - o)).matrix();

  grads[slot::kLstmWx].noalias() += dgates * k.mix.transpose();
  grads[slot::kLstmWh].noalias() += dgates * k.h_prev.transpose();
  grads[slot::kLstmB] += dgates.rowwise().sum();
  LstmState<S> dprev;
  dprev.h.noalias() = params_[slot::kLstmWh].transpose() * dgates;
  dprev.c = (dc.array() * f).matrix();

  // Mixing layer.
  MatX<S> dz = params_[slot::kLstmWx].transpose() * dgates;
  dz = (k.mix.array() > S(0)).select(dz, S(0));
  const MatX<S>& wm = params_[slot::kMixW];
  grads[slot::kMixW].leftCols(F).noalias() += dz * k.features.transpose();
  grads[slot::kMixW].rightCols(cfg_.language_dim).noalias() += dz * k.language.transpose();
  grads[slot::kMixB] += dz.rowwise().sum();
  const MatX<S> dfeat = wm.leftCols(F).transpose() * dz;
  const MatX<S> dlang = wm.rightCols(cfg_.language_dim).transpose() * dz;

  // Language embedding.
  grads[slot::kLangW].noalias() += dlang * k.language_in.transpose();
  grads[slot::kLangB] += dlang.rowwise().sum();

  // Conv stack, top down.
  const auto sides = cfg_.sides();
  const int p_last = sides[kConvLayers] * sides[kConvLayers];
  const int ch_last = cfg_.convs[kConvLayers - 1].out_channels;
  MatX<S> dy(static_cast<Eigen::Index>(batch) * p_last, ch_last);
  for (int b = 0; b < batch; ++b)
    for (int c = 0; c < ch_last; ++c) dy.col(c).segment(b * p_last, p_last) = dfeat.col(b).segment(c * p_last, p_last);

  MatX<S> cols, dcols, dx;
  for (int l = kConvLayers - 1; l >= 0; --l) {
    dy = (k.conv_out[l].array() > S(0)).select(dy, S(0));
    const MatX<S>& x = l == 0 ? k.input : k.conv_out[l - 1];
    im2col(x, batch, sides[l], cfg_.convs[l], cols);
    grads[slot::conv_w(l)].noalias() += dy.transpose() * cols;
    grads[slot::conv_b(l)] += dy.colwise().sum().transpose();
    if (l == 0) break;
    dcols.noalias() = dy * params_[slot::conv_w(l)];
    col2im(dcols, batch, sides[l], cfg_.convs[l], dx);
    dy.swap(dx);
  }
  return dprev;
}

template void im2col<float>(const MatX<float>&, int, int, const ConvSpec&, MatX<float>&);
template void im2col<double>(const MatX<double>&, int, int, const ConvSpec&, MatX<double>&);
template void col2im<float>(const MatX<float>&, int, int, const ConvSpec&, MatX<float>&);
template void col2im<double>(const MatX<double>&, int, int, const ConvSpec&, MatX<double>&);
template MatX<float> softmax_columns<float>(const MatX<float>&);
template MatX<double> softmax_columns<double>(const MatX<double>&);
template VecX<float> frame_column<float>(std::span<const std::uint8_t>);
template VecX<double> frame_column<double>(std::span<const std::uint8_t>);
template class Network<float>;
template class Network<double>;

}  // namespace groundworld::nn
