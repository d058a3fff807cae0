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

#include "groundworld/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace groundworld::nn {
namespace {

constexpr char kMagic[4] = {'G', 'W', 'C', 'K'};
constexpr std::uint32_t kMaxString = 1u << 20;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  template <typename T>
  void pod(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void tensors(const ParamSet<float>& p) {
    pod(static_cast<std::uint32_t>(p.count()));
    for (int i = 0; i < p.count(); ++i) {
      str(p.names[static_cast<std::size_t>(i)]);
      pod(static_cast<std::int64_t>(p[i].rows()));
      pod(static_cast<std::int64_t>(p[i].cols()));
      out_.write(reinterpret_cast<const char*>(p[i].data()),
                 static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(p[i].size())));
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <typename T>
  T pod() {
    T v{};
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint32_t>();
    if (n > kMaxString) throw CheckpointError("checkpoint string too long");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  ParamSet<float> tensors() {
    const auto n = pod<std::uint32_t>();
    if (n > 1024) throw CheckpointError("implausible tensor count");
    ParamSet<float> p;
    for (std::uint32_t i = 0; i < n; ++i) {
      p.names.push_back(str());
      const auto rows = pod<std::int64_t>(), cols = pod<std::int64_t>();
      if (rows < 0 || cols < 0 || rows * cols > (std::int64_t{1} << 28))
        throw CheckpointError(fmt::format("bad shape for tensor '{}'", p.names.back()));
      MatX<float> t(rows, cols);
      raw(t.data(), sizeof(float) * static_cast<std::size_t>(t.size()));
      p.tensors.push_back(std::move(t));
    }
    return p;
  }

 private:
  void raw(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw CheckpointError("truncated checkpoint");
  }
  std::istream& in_;
};

void write_net(Writer& w, const NetConfig& n) {
  w.pod<std::int32_t>(n.frame_size);
  for (const auto& c : n.convs) {
    w.pod<std::int32_t>(c.in_channels);
    w.pod<std::int32_t>(c.out_channels);
    w.pod<std::int32_t>(c.kernel);
    w.pod<std::int32_t>(c.stride);
  }
  w.pod<std::int32_t>(n.language_in);
  w.pod<std::int32_t>(n.language_dim);
  w.pod<std::int32_t>(n.mix_dim);
  w.pod<std::int32_t>(n.hidden);
  w.pod<std::int32_t>(n.actions);
}

NetConfig read_net(Reader& r) {
  NetConfig n;
  n.frame_size = r.pod<std::int32_t>();
  for (auto& c : n.convs) {
    c.in_channels = r.pod<std::int32_t>();
    c.out_channels = r.pod<std::int32_t>();
    c.kernel = r.pod<std::int32_t>();
    c.stride = r.pod<std::int32_t>();
  }
  n.language_in = r.pod<std::int32_t>();
  n.language_dim = r.pod<std::int32_t>();
  n.mix_dim = r.pod<std::int32_t>();
  n.hidden = r.pod<std::int32_t>();
  n.actions = r.pod<std::int32_t>();
  try {
    n.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(fmt::format("bad network config: {}", e.what()));
  }
  return n;
}

void check_shapes(const ParamSet<float>& got, const ParamSet<float>& want, const char* what) {
  if (got.count() != want.count())
    throw CheckpointError(fmt::format("{}: expected {} tensors, found {}", what, want.count(), got.count()));
  for (int i = 0; i < want.count(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (got.names[k] != want.names[k] || got[i].rows() != want[i].rows() || got[i].cols() != want[i].cols())
      throw CheckpointError(fmt::format("{}: tensor {} is '{}' {}x{}, expected '{}' {}x{}", what, i, got.names[k],
                                        got[i].rows(), got[i].cols(), want.names[k], want[i].rows(),
                                        want[i].cols()));
  }
}

std::string describe(const VocabLayout& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.slot_dims.size(); ++i) s += fmt::format("{}{}", i ? "," : "", v.slot_dims[i]);
  return s + "]";
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  check_shapes(ckpt.params, ParamSet<float>::zeros(ckpt.net), "params");
  if (ckpt.optimizer) check_shapes(*ckpt.optimizer, ParamSet<float>::zeros(ckpt.net), "optimizer");
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic, 4);
  w.pod(kCheckpointVersion);
  w.pod(static_cast<std::uint8_t>(ckpt.kind));
  w.pod(static_cast<std::uint32_t>(ckpt.vocab.slot_dims.size()));
  for (int d : ckpt.vocab.slot_dims) w.pod(static_cast<std::uint32_t>(d));
  write_net(w, ckpt.net);
  w.pod(ckpt.episodes);
  w.str(ckpt.rng_state);
  w.tensors(ckpt.params);
  w.pod(static_cast<std::uint8_t>(ckpt.optimizer.has_value()));
  if (ckpt.optimizer) w.tensors(*ckpt.optimizer);

  // Write then rename, so an interrupted save never leaves a torn file.
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(fmt::format("cannot write {}", tmp.string()));
    const std::string bytes = buf.str();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<VocabLayout>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("cannot open checkpoint {}", path.string()));
  Reader r(in);
  char magic[4];
  for (char& c : magic) c = r.pod<char>();
  if (std::memcmp(magic, kMagic, 4) != 0) throw CheckpointError("not a groundworld checkpoint");
  if (const auto v = r.pod<std::uint32_t>(); v != kCheckpointVersion)
    throw CheckpointError(fmt::format("unsupported checkpoint version {}", v));

  Checkpoint ckpt;
  const auto kind = r.pod<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(EnvKind::DP)) throw CheckpointError("bad env kind");
  ckpt.kind = static_cast<EnvKind>(kind);
  const auto slots = r.pod<std::uint32_t>();
  if (slots > 64) throw CheckpointError("implausible vocabulary layout");
  for (std::uint32_t i = 0; i < slots; ++i) ckpt.vocab.slot_dims.push_back(static_cast<int>(r.pod<std::uint32_t>()));
  if (ckpt.vocab != vocab_sizes(ckpt.kind))
    throw CheckpointError(fmt::format("vocabulary layout {} does not belong to env kind {}", describe(ckpt.vocab),
                                      name(ckpt.kind)));
  if (expected && *expected != ckpt.vocab)
    throw CheckpointError(fmt::format("vocabulary layout mismatch: checkpoint has {}, expected {}",
                                      describe(ckpt.vocab), describe(*expected)));
  ckpt.net = read_net(r);
  if (ckpt.net.language_in != ckpt.vocab.flat_size())
    throw CheckpointError("network language input does not match the vocabulary layout");
  ckpt.episodes = r.pod<std::int64_t>();
  ckpt.rng_state = r.str();
  const ParamSet<float> want = ParamSet<float>::zeros(ckpt.net);
  ckpt.params = r.tensors();
  check_shapes(ckpt.params, want, "params");
  if (r.pod<std::uint8_t>()) {
    ckpt.optimizer = r.tensors();
    check_shapes(*ckpt.optimizer, want, "optimizer");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes after checkpoint");
  return ckpt;
}

}  // namespace groundworld::nn
