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

// Curriculum training, zero-shot evaluation and the P -> DP transfer.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "groundworld/env.hpp"
#include "groundworld/nn/a2c.hpp"
#include "groundworld/nn/checkpoint.hpp"
#include "groundworld/splits.hpp"

namespace groundworld {

struct RunConfig {
  EnvKind kind = EnvKind::D;
  CurriculumSchedule schedule = CurriculumSchedule::preset("8D");
  SplitFilter train_split = SplitFilter::Train;
  DistinctnessRule rule = DistinctnessRule::DifferBoth;
  /// Attribute restriction; empty means all.
  std::vector<Color> colors;
  std::vector<Shape> shapes;
  std::string layout = "standard";  ///< "standard" (4 locations) or "pair" (2)
  int frame_size = 128;

  std::uint64_t env_seed = 1;
  std::uint64_t init_seed = 1;
  std::int64_t episode_budget = 5'000'000;
  std::int64_t step_budget = 0;  ///< 0 = unlimited
  std::int64_t checkpoint_every = 0;  ///< episodes; 0 = stage ends and final only

  std::filesystem::path out_dir = "run";
  bool record_wall_clock = false;  ///< off keeps metrics byte-reproducible
  std::int64_t log_every = 1000;   ///< episodes between progress lines; 0 = quiet
  int metrics_window = 1000;

  nn::A2CConfig a2c;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Parses a TOML run file (see docs/config.md). Throws std::runtime_error
/// with the offending key on bad input.
RunConfig parse_run_config(std::string_view toml_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// GROUNDWORLD_SEED, when set, replaces both seeds. Returns true if applied.
bool apply_seed_override(RunConfig& cfg);

/// Environment settings for a run: subsets of the first stage, the run's
/// attribute restriction, layout and frame size.
EnvConfig make_env_config(const RunConfig& cfg, SplitFilter split);

// ---------------------------------------------------------------------------
// Metrics

struct MetricsRow {
  std::int64_t episode = 0;  ///< 1-based
  int stage = 0;
  double success_rate = 0.0;  ///< perfect episodes over the trailing window
  double mean_reward = 0.0;   ///< over the same window
  int steps = 0;
  double reward = 0.0;
  bool perfect = false;
  double wall_clock = 0.0;  ///< seconds since start, 0 when not recorded
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
/// Throws std::runtime_error on a malformed file.
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Trailing-window success and mean reward, fed one episode at a time.
class RollingWindow {
 public:
  explicit RollingWindow(int window) : window_(window) {}
  void push(bool perfect, double reward);
  double success_rate() const noexcept;
  double mean_reward() const noexcept;

 private:
  int window_;
  std::vector<std::pair<bool, double>> ring_;
  std::size_t head_ = 0;
  int perfect_ = 0;
  double reward_ = 0.0;
};

// ---------------------------------------------------------------------------
// Acting

/// Draws from a categorical distribution by inverse CDF on 53 random bits.
int sample_action(const Eigen::Ref<const Eigen::VectorXf>& probs, std::mt19937_64& rng);

/// Copies observation `b` into column `b` of the network input batches.
void load_observation(const Observation& obs, int b, nn::MatX<float>& frames, nn::MatX<float>& language);

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
  std::vector<std::int64_t> stage_episode_counts;  ///< episodes to criterion, per finished stage
  std::vector<std::string> stage_names;
  bool completed = false;
  bool budget_exhausted = false;
  std::int64_t episodes = 0;
  std::int64_t steps = 0;
  int updates = 0;
  double final_success = 0.0;  ///< trailing-window rate at the end
  bool isolation_ok = true;    ///< no Test instruction was ever sampled
  std::size_t distinct_instructions = 0;
  std::filesystem::path final_checkpoint;
  std::filesystem::path metrics_path;
};

struct TrainOptions {
  std::optional<nn::ParamSet<float>> initial;  ///< start from these weights
  std::ostream* log = nullptr;
};

/// Runs the schedule until it completes, a stage cap is hit or the budget
/// is spent. Writes metrics.csv, stage and final checkpoints and
/// summary.json into `cfg.out_dir`.
TrainResult train(const RunConfig& cfg, const TrainOptions& options = {});

// ---------------------------------------------------------------------------
// Evaluation

struct EvalOptions {
  int episodes = 1000;
  int repeats = 3;
  std::uint64_t seed = 1;
  bool greedy = false;
  int batch = 8;  ///< environments stepped together
};

struct EvalResult {
  std::vector<double> success_rates;  ///< percent, one per repeat
  double mean = 0.0;
  double sd = 0.0;  ///< sample standard deviation over repeats
  double mean_reward = 0.0;
  std::int64_t successes = 0;  ///< reached the target, penalties allowed
  std::int64_t perfect = 0;
  std::int64_t wrong_target = 0;
  std::int64_t timeouts = 0;
  std::int64_t episodes = 0;

  /// "76.1 ± 0.99"
  std::string formatted() const;
};

/// Runs `net` without updating it. Success means a perfect +10 episode.
EvalResult evaluate(const nn::Network<float>& net, const EnvConfig& env, const EvalOptions& options);

/// Loads a checkpoint, checks its env kind and evaluates on the Test split
/// with every concept enabled.
EvalResult evaluate_zero_shot(const std::filesystem::path& checkpoint, EnvKind kind, const EvalOptions& options);

// ---------------------------------------------------------------------------
// P -> DP transfer

/// Position of each P vocabulary slot inside the DP layout.
inline constexpr std::array<int, 5> kPSlotInDP = {1, 2, 3, 5, 6};

/// Widens a P network to DP: language weight columns of every P slot move
/// to the matching DP slot, the two determiner slots are drawn fresh from
/// the language layer's fan-in initializer. Everything else is copied.
/// Throws nn::CheckpointError unless `p` is a P network.
nn::Checkpoint widen_p_to_dp(const nn::Checkpoint& p, std::uint64_t seed);

struct FinetuneResult {
  TrainResult train;
  EvalResult eval;
};

FinetuneResult finetune_dp(const std::filesystem::path& p_checkpoint, RunConfig cfg, const EvalOptions& eval,
                           std::ostream* log = nullptr);

}  // namespace groundworld
