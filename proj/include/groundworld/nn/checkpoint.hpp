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

// Binary checkpoint, little-endian:
//
//   "GWCK" u32 version
//   u8 env_kind, u32 n, n x u32 vocab slot dims
//   network config (i32 fields)
//   u64 episodes, string rng_state
//   u32 tensor count, tensors
//   u8 has_optimizer [, u32 tensor count, tensors]
//
// where string = u32 length + bytes and tensor = string name, i64 rows,
// i64 cols, rows * cols f32 in column-major order.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "groundworld/nn/config.hpp"
#include "groundworld/nn/params.hpp"
#include "groundworld/types.hpp"

namespace groundworld::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  EnvKind kind = EnvKind::D;
  VocabLayout vocab;
  NetConfig net;
  std::int64_t episodes = 0;
  std::string rng_state;  ///< textual std::mt19937_64 state, may be empty
  ParamSet<float> params;
  std::optional<ParamSet<float>> optimizer;  ///< RMSProp square averages
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws CheckpointError on a bad header, truncation, tensor shapes that do
/// not match the stored network config, or when `expected` is given and the
/// stored vocabulary layout differs.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<VocabLayout>& expected = std::nullopt);

}  // namespace groundworld::nn
