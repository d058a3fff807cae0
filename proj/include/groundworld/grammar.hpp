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

#include <Eigen/Core>

#include "groundworld/splits.hpp"
#include "groundworld/types.hpp"

namespace groundworld {

struct GrammarConfig {
  EnvKind kind = EnvKind::D;
  DistinctnessRule rule = DistinctnessRule::DifferBoth;
  std::vector<Determiner> determiners{kAllDeterminers.begin(), kAllDeterminers.end()};
  std::vector<Preposition> prepositions{kAllPrepositions.begin(), kAllPrepositions.end()};
  std::vector<Color> colors{kAllColors.begin(), kAllColors.end()};
  std::vector<Shape> shapes{kAllShapes.begin(), kAllShapes.end()};

  /// Throws std::invalid_argument on an empty subset.
  void validate() const;
};

/// Determiner pairings a combined instruction can be realized with inside a
/// single 3x3x3 block:
///  - Between/Among keep Object A singular (A, This, That) and Object B
///    plural (Few, Some, Many, These, Those);
///  - Object A and Object B cannot demand opposite proximity (near vs far),
///    since both groups share one location.
bool dp_feasible(Determiner det_a, Preposition prep, Determiner det_b) noexcept;

/// True when `instr` is a sentence of the grammar `cfg` describes.
bool admits(const GrammarConfig& cfg, const Instruction& instr);

/// All instructions of the grammar in lexicographic slot order (slot order
/// as in vocab_sizes). Duplicate-free.
std::vector<Instruction> enumerate_instructions(const GrammarConfig& cfg);

/// Filtered enumeration cached for repeated uniform sampling.
class InstructionPool {
 public:
  InstructionPool(const GrammarConfig& cfg, SplitFilter filter, const SplitTables& tables = {});

  /// Uniform draw. Throws std::runtime_error if the pool is empty.
  const Instruction& sample(std::mt19937_64& rng) const;
  const std::vector<Instruction>& instructions() const noexcept { return pool_; }
  bool empty() const noexcept { return pool_.empty(); }

 private:
  std::vector<Instruction> pool_;
};

Instruction sample_instruction(const GrammarConfig& cfg, SplitFilter filter,
                               const SplitTables& tables, std::mt19937_64& rng);

struct EncodedInstruction {
  VocabLayout layout;
  Eigen::VectorXf flat;

  /// One-hot vector of slot `i`.
  Eigen::VectorXf slot(int i) const;
  std::vector<int> hot_indices() const;
};

EncodedInstruction encode(const Instruction& instr);

struct CountRow {
  EnvKind kind{};
  DistinctnessRule rule{};
  std::int64_t total = 0;
  std::int64_t train = 0;
  std::int64_t test = 0;
  std::int64_t stated_total = 0;
  std::int64_t stated_train = 0;
  std::int64_t stated_test = 0;

  bool matches_stated() const noexcept {
    return total == stated_total && train == stated_train && test == stated_test;
  }
};

/// Enumeration sizes intersected with the split tables, next to the
/// originally published figures (D 200/160/40, P 6000/4800/1200,
/// DP 160000/120000/40000).
CountRow count_report(EnvKind kind, DistinctnessRule rule, const SplitTables& tables = {});

std::string format_count_table(const std::vector<CountRow>& rows);
/// One machine-readable line per row: "count env=d rule=both total=200 ...".
std::string format_count_rows(const std::vector<CountRow>& rows);

}  // namespace groundworld
