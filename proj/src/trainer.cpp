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

#include "groundworld/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace groundworld {

using nn::MatX;
using nn::VecX;

void RunConfig::validate() const {
  schedule.validate();
  a2c.validate();
  if (frame_size < 36) throw std::invalid_argument("frame_size must be at least 36 pixels");
  if (layout != "standard" && layout != "pair") throw std::invalid_argument("layout must be 'standard' or 'pair'");
  if (episode_budget < 1) throw std::invalid_argument("episode budget must be positive");
  if (step_budget < 0 || checkpoint_every < 0 || log_every < 0)
    throw std::invalid_argument("budgets and cadences must be non-negative");
  if (metrics_window < 1) throw std::invalid_argument("metrics window must be positive");
  for (const auto& s : schedule.stages) {
    if (kind == EnvKind::D && s.determiners.empty()) throw std::invalid_argument("D stage without determiners");
    if (kind == EnvKind::P && s.prepositions.empty()) throw std::invalid_argument("P stage without prepositions");
  }
}

EnvConfig make_env_config(const RunConfig& cfg, SplitFilter split) {
  EnvConfig e;
  e.grammar.kind = cfg.kind;
  e.grammar.rule = cfg.rule;
  if (!cfg.colors.empty()) e.grammar.colors = cfg.colors;
  if (!cfg.shapes.empty()) e.grammar.shapes = cfg.shapes;
  const auto& first = cfg.schedule.stages.front();
  e.grammar.determiners = first.determiners;
  e.grammar.prepositions = first.prepositions;
  e.split = split;
  e.scene.room = cfg.layout == "pair" ? RoomLayout::pair() : RoomLayout::standard();
  e.render.camera.width = e.render.camera.height = cfg.frame_size;
  return e;
}

// ---------------------------------------------------------------------------
// Metrics

std::string metrics_csv_header() { return "episode,stage,success_rate,mean_reward,steps,reward,perfect,wall_clock"; }

std::string metrics_csv_row(const MetricsRow& r) {
  return fmt::format("{},{},{:.6f},{:.6f},{},{},{},{:.3f}", r.episode, r.stage, r.success_rate, r.mean_reward,
                     r.steps, r.reward, r.perfect ? 1 : 0, r.wall_clock);
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open metrics file {}", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != metrics_csv_header())
    throw std::runtime_error(fmt::format("{}: missing or unexpected header", path.string()));
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) throw std::runtime_error(fmt::format("{}:{}: expected 8 fields", path.string(), lineno));
    try {
      std::size_t used = 0;
      auto whole = [&](auto v, const std::string& s) {
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      MetricsRow r;
      r.episode = whole(std::stoll(f[0], &used), f[0]);
      r.stage = whole(std::stoi(f[1], &used), f[1]);
      r.success_rate = whole(std::stod(f[2], &used), f[2]);
      r.mean_reward = whole(std::stod(f[3], &used), f[3]);
      r.steps = whole(std::stoi(f[4], &used), f[4]);
      r.reward = whole(std::stod(f[5], &used), f[5]);
      r.perfect = whole(std::stoi(f[6], &used), f[6]) != 0;
      r.wall_clock = whole(std::stod(f[7], &used), f[7]);
      if (!rows.empty() && r.episode <= rows.back().episode)
        throw std::runtime_error(fmt::format("{}:{}: episode index not increasing", path.string(), lineno));
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error(fmt::format("{}:{}: malformed number", path.string(), lineno));
    }
  }
  return rows;
}

void RollingWindow::push(bool perfect, double reward) {
  if (ring_.size() < static_cast<std::size_t>(window_)) {
    ring_.emplace_back(perfect, reward);
  } else {
    perfect_ -= ring_[head_].first ? 1 : 0;
    reward_ -= ring_[head_].second;
    ring_[head_] = {perfect, reward};
    head_ = (head_ + 1) % ring_.size();
  }
  perfect_ += perfect ? 1 : 0;
  reward_ += reward;
}

double RollingWindow::success_rate() const noexcept {
  return ring_.empty() ? 0.0 : static_cast<double>(perfect_) / static_cast<double>(ring_.size());
}

double RollingWindow::mean_reward() const noexcept {
  return ring_.empty() ? 0.0 : reward_ / static_cast<double>(ring_.size());
}

// ---------------------------------------------------------------------------
// Acting

int sample_action(const Eigen::Ref<const Eigen::VectorXf>& probs, std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += static_cast<double>(probs[i]);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

void load_observation(const Observation& obs, int b, MatX<float>& frames, MatX<float>& language) {
  const auto& bytes = obs.frame.data;
  if (static_cast<Eigen::Index>(bytes.size()) != frames.rows())
    throw std::invalid_argument("frame size does not match the network input");
  if (obs.instruction.flat.size() != language.rows())
    throw std::invalid_argument("instruction encoding does not match the network input");
  float* dst = frames.col(b).data();
  for (std::size_t i = 0; i < bytes.size(); ++i) dst[i] = static_cast<float>(bytes[i]) * (1.0f / 255.0f);
  language.col(b) = obs.instruction.flat;
}

namespace {

int greedy_action(const Eigen::Ref<const Eigen::VectorXf>& probs) {
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << text;
}

nn::Checkpoint make_checkpoint(const RunConfig& cfg, const nn::Network<float>& net,
                               const nn::RmsProp<float>& opt, std::int64_t episodes,
                               const std::mt19937_64& seed_rng) {
  nn::Checkpoint c;
  c.kind = cfg.kind;
  c.vocab = vocab_sizes(cfg.kind);
  c.net = net.config();
  c.episodes = episodes;
  std::ostringstream rs;
  rs << seed_rng;
  c.rng_state = rs.str();
  c.params = net.params();
  c.optimizer = opt.square_avg();
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Training

TrainResult train(const RunConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  const int K = cfg.a2c.workers, T = cfg.a2c.n_step;
  std::filesystem::create_directories(cfg.out_dir);

  CurriculumTracker tracker(cfg.schedule);
  const EnvConfig env_cfg = make_env_config(cfg, cfg.train_split);
  std::vector<Env> envs;
  envs.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) envs.emplace_back(env_cfg);

  const nn::NetConfig net_cfg = nn::NetConfig::for_env(cfg.kind, cfg.frame_size);
  nn::Network<float> net(net_cfg, options.initial ? *options.initial : nn::init_params<float>(net_cfg, cfg.init_seed));
  nn::RmsProp<float> opt(net.params(), cfg.a2c);
  auto grads = net.params().zeros_like();

  std::mt19937_64 seed_rng(cfg.env_seed);
  std::mt19937_64 act_rng(cfg.init_seed ^ 0x9e3779b97f4a7c15ull);

  TrainResult result;
  for (const auto& s : cfg.schedule.stages) result.stage_names.push_back(s.name);
  result.metrics_path = cfg.out_dir / "metrics.csv";
  std::ofstream metrics(result.metrics_path, std::ios::binary | std::ios::trunc);
  if (!metrics) throw std::runtime_error(fmt::format("cannot write {}", result.metrics_path.string()));
  metrics << metrics_csv_header() << '\n';

  std::set<Instruction> seen;
  std::vector<Observation> obs(static_cast<std::size_t>(K));
  auto start_episode = [&](int k) {
    obs[static_cast<std::size_t>(k)] = envs[static_cast<std::size_t>(k)].reset(seed_rng()).observation;
    seen.insert(envs[static_cast<std::size_t>(k)].state().scene.instruction);
  };
  for (int k = 0; k < K; ++k) start_episode(k);

  const auto t0 = std::chrono::steady_clock::now();
  RollingWindow window(cfg.metrics_window);
  nn::LstmState<float> state = nn::LstmState<float>::zeros(net_cfg.hidden, K);
  VecX<float> next_mask = VecX<float>::Ones(K);
  MatX<float> frames(3 * cfg.frame_size * cfg.frame_size, K), language(net_cfg.language_in, K);
  bool stop = false;

  auto checkpoint = [&](const std::filesystem::path& path) {
    nn::save_checkpoint(path, make_checkpoint(cfg, net, opt, result.episodes, seed_rng));
  };

  auto finish_episode = [&](int k) {
    Env& env = envs[static_cast<std::size_t>(k)];
    const EpisodeState& s = env.state();
    const int stage = tracker.stage();
    window.push(s.perfect(), s.total_reward);
    MetricsRow row{++result.episodes, stage, window.success_rate(), window.mean_reward(), s.step, s.total_reward,
                   s.perfect(), 0.0};
    if (cfg.record_wall_clock)
      row.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    metrics << metrics_csv_row(row) << '\n';

    if (tracker.record({s.perfect()})) {
      const auto& name = cfg.schedule.stages[static_cast<std::size_t>(stage)].name;
      checkpoint(cfg.out_dir / fmt::format("stage{}_{}.ckpt", stage, name));
      if (options.log)
        *options.log << fmt::format("stage {} ({}) met the criterion after {} episodes\n", stage, name,
                                    tracker.stage_episode_counts().back());
      if (tracker.completed()) {
        stop = true;
      } else {
        const auto& next = cfg.schedule.stages[static_cast<std::size_t>(tracker.stage())];
        for (auto& e : envs) e.set_subsets(next.determiners, next.prepositions);
      }
    }
    if (tracker.cap_reached() || result.episodes >= cfg.episode_budget ||
        (cfg.step_budget > 0 && result.steps >= cfg.step_budget)) {
      stop = true;
      result.budget_exhausted = !tracker.completed();
    }
    if (cfg.checkpoint_every > 0 && result.episodes % cfg.checkpoint_every == 0) checkpoint(cfg.out_dir / "latest.ckpt");
    if (options.log && cfg.log_every > 0 && result.episodes % cfg.log_every == 0)
      *options.log << fmt::format("episode {} stage {} success {:.3f} reward {:.2f} steps {}\n", result.episodes,
                                  tracker.stage(), window.success_rate(), window.mean_reward(), result.steps);
  };

  while (!stop) {
    nn::Rollout<float> roll;
    roll.initial = state;
    roll.rewards = MatX<float>::Zero(T, K);
    roll.dones = MatX<float>::Zero(T, K);
    roll.masks = MatX<float>::Ones(T, K);
    std::vector<nn::StepCache<float>> caches;
    caches.reserve(static_cast<std::size_t>(T));

    for (int t = 0; t < T && !stop; ++t) {
      for (int k = 0; k < K; ++k) load_observation(obs[static_cast<std::size_t>(k)], k, frames, language);
      roll.masks.row(t) = next_mask.transpose();
      caches.push_back(net.forward(frames, language, nn::masked<float>(state, next_mask)));
      const auto& cache = caches.back();
      std::vector<int> actions(static_cast<std::size_t>(K));
      for (int k = 0; k < K; ++k) {
        const int a = sample_action(cache.probs.col(k), act_rng);
        actions[static_cast<std::size_t>(k)] = a;
        StepResult r = envs[static_cast<std::size_t>(k)].step(static_cast<Action>(a));
        ++result.steps;
        roll.rewards(t, k) = static_cast<float>(r.reward);
        next_mask[k] = 1.0f;
        if (r.done) {
          roll.dones(t, k) = 1.0f;
          next_mask[k] = 0.0f;
          finish_episode(k);
          start_episode(k);
        } else {
          obs[static_cast<std::size_t>(k)] = std::move(r.observation);
        }
      }
      roll.actions.push_back(std::move(actions));
      state = {cache.h, cache.c};
    }

    const int steps = roll.steps();
    roll.rewards.conservativeResize(steps, K);
    roll.dones.conservativeResize(steps, K);
    roll.masks.conservativeResize(steps, K);

    for (int k = 0; k < K; ++k) load_observation(obs[static_cast<std::size_t>(k)], k, frames, language);
    roll.bootstrap = net.forward(frames, language, nn::masked<float>(state, next_mask)).value.row(0).transpose();

    const MatX<float> returns =
        nn::discounted_returns<float>(roll.rewards, roll.dones, roll.bootstrap, static_cast<float>(cfg.a2c.gamma));
    MatX<float> values(steps, K);
    for (int t = 0; t < steps; ++t) values.row(t) = caches[static_cast<std::size_t>(t)].value;
    const MatX<float> advantages = returns - values;
    grads.set_zero();
    nn::a2c_backward<float>(net, caches, roll, returns, advantages, cfg.a2c, grads);
    nn::clip_grad_norm<float>(grads, static_cast<float>(cfg.a2c.max_grad_norm));
    opt.step(net.params(), grads);
    ++result.updates;
  }
  metrics.flush();

  result.stage_episode_counts = tracker.stage_episode_counts();
  result.completed = tracker.completed();
  result.final_success = window.success_rate();
  result.distinct_instructions = seen.size();
  if (cfg.train_split == SplitFilter::Train)
    for (const auto& instr : seen)
      if (membership(instr, env_cfg.tables) == SplitLabel::Test) result.isolation_ok = false;
  if (!result.isolation_ok) throw std::logic_error("training sampled a Test-split instruction");

  result.final_checkpoint = cfg.out_dir / "final.ckpt";
  checkpoint(result.final_checkpoint);

  nlohmann::ordered_json summary;
  summary["env_kind"] = std::string(name(cfg.kind));
  summary["schedule"] = cfg.schedule.label();
  summary["completed"] = result.completed;
  summary["budget_exhausted"] = result.budget_exhausted;
  summary["episodes"] = result.episodes;
  summary["steps"] = result.steps;
  summary["updates"] = result.updates;
  summary["final_success"] = result.final_success;
  auto& stages = summary["stages"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.stage_episode_counts.size(); ++i)
    stages.push_back({{"name", result.stage_names[i]},
                      {"episodes", result.stage_episode_counts[i]},
                      {"episodes_millions", static_cast<double>(result.stage_episode_counts[i]) / 1e6}});
  summary["distinct_instructions"] = result.distinct_instructions;
  summary["train_test_isolation"] = result.isolation_ok;
  write_text(cfg.out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

// ---------------------------------------------------------------------------
// Evaluation

std::string EvalResult::formatted() const { return fmt::format("{:.1f} ± {:.2f}", mean, sd); }

EvalResult evaluate(const nn::Network<float>& net, const EnvConfig& env_cfg, const EvalOptions& options) {
  if (options.episodes < 1 || options.repeats < 1 || options.batch < 1)
    throw std::invalid_argument("evaluation needs positive episode, repeat and batch counts");
  const nn::NetConfig& nc = net.config();
  if (env_cfg.render.camera.width != nc.frame_size || env_cfg.render.camera.height != nc.frame_size)
    throw std::invalid_argument("camera size does not match the network frame size");
  if (vocab_sizes(env_cfg.kind()).flat_size() != nc.language_in)
    throw std::invalid_argument("network vocabulary does not match the environment kind");

  EvalResult out;
  double reward_sum = 0.0;
  std::mt19937_64 seed_rng(options.seed);
  std::mt19937_64 act_rng(options.seed ^ 0x5851f42d4c957f2dull);
  const int B = std::min(options.batch, options.episodes);
  std::vector<Env> envs;
  for (int b = 0; b < B; ++b) envs.emplace_back(env_cfg);

  for (int rep = 0; rep < options.repeats; ++rep) {
    // Episode seeds are fixed up front so results do not depend on batch size.
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(options.episodes));
    for (auto& s : seeds) s = seed_rng();
    int next = 0, finished = 0;
    std::int64_t perfect = 0;
    std::vector<Observation> obs(static_cast<std::size_t>(B));
    std::vector<bool> live(static_cast<std::size_t>(B), false);
    nn::LstmState<float> state = nn::LstmState<float>::zeros(nc.hidden, B);
    VecX<float> mask = VecX<float>::Zero(B);
    MatX<float> frames = MatX<float>::Zero(3 * nc.frame_size * nc.frame_size, B);
    MatX<float> language = MatX<float>::Zero(nc.language_in, B);
    for (int b = 0; b < B; ++b) {
      obs[static_cast<std::size_t>(b)] = envs[static_cast<std::size_t>(b)].reset(seeds[static_cast<std::size_t>(next++)]).observation;
      live[static_cast<std::size_t>(b)] = true;
    }
    while (finished < options.episodes) {
      for (int b = 0; b < B; ++b)
        if (live[static_cast<std::size_t>(b)]) load_observation(obs[static_cast<std::size_t>(b)], b, frames, language);
      const auto cache = net.forward(frames, language, nn::masked<float>(state, mask));
      state = {cache.h, cache.c};
      for (int b = 0; b < B; ++b) {
        const auto sb = static_cast<std::size_t>(b);
        if (!live[sb]) continue;
        const int a = options.greedy ? greedy_action(cache.probs.col(b)) : sample_action(cache.probs.col(b), act_rng);
        StepResult r = envs[sb].step(static_cast<Action>(a));
        mask[b] = 1.0f;
        if (!r.done) {
          obs[sb] = std::move(r.observation);
          continue;
        }
        const EpisodeState& s = envs[sb].state();
        ++finished;
        reward_sum += s.total_reward;
        perfect += s.perfect() ? 1 : 0;
        out.successes += s.outcome == Outcome::Success ? 1 : 0;
        out.wrong_target += s.outcome == Outcome::WrongTarget ? 1 : 0;
        out.timeouts += s.outcome == Outcome::Timeout ? 1 : 0;
        mask[b] = 0.0f;
        if (next < options.episodes) {
          obs[sb] = envs[sb].reset(seeds[static_cast<std::size_t>(next++)]).observation;
        } else {
          live[sb] = false;
        }
      }
    }
    out.perfect += perfect;
    out.success_rates.push_back(100.0 * static_cast<double>(perfect) / options.episodes);
  }
  out.episodes = static_cast<std::int64_t>(options.episodes) * options.repeats;
  const double n = static_cast<double>(out.success_rates.size());
  out.mean = std::accumulate(out.success_rates.begin(), out.success_rates.end(), 0.0) / n;
  if (out.success_rates.size() > 1) {
    double ss = 0.0;
    for (double r : out.success_rates) ss += (r - out.mean) * (r - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  out.mean_reward = reward_sum / static_cast<double>(out.episodes);
  return out;
}

EvalResult evaluate_zero_shot(const std::filesystem::path& checkpoint, EnvKind kind, const EvalOptions& options) {
  nn::Checkpoint ckpt = nn::load_checkpoint(checkpoint, vocab_sizes(kind));
  if (ckpt.kind != kind)
    throw nn::CheckpointError(fmt::format("checkpoint was trained on {}, not {}", name(ckpt.kind), name(kind)));
  RunConfig rc;
  rc.kind = kind;
  rc.frame_size = ckpt.net.frame_size;
  rc.schedule = CurriculumSchedule::preset(kind == EnvKind::D ? "8D" : kind == EnvKind::P ? "8P" : "DP");
  const EnvConfig env = make_env_config(rc, SplitFilter::Test);
  const nn::Network<float> net(ckpt.net, std::move(ckpt.params));
  return evaluate(net, env, options);
}

// ---------------------------------------------------------------------------
// P -> DP transfer

nn::Checkpoint widen_p_to_dp(const nn::Checkpoint& p, std::uint64_t seed) {
  if (p.kind != EnvKind::P || p.vocab != vocab_sizes(EnvKind::P))
    throw nn::CheckpointError("DP finetuning needs a checkpoint trained on P");
  const VocabLayout pv = vocab_sizes(EnvKind::P), dv = vocab_sizes(EnvKind::DP);
  auto offsets = [](const VocabLayout& v) {
    std::vector<int> off(v.slot_dims.size(), 0);
    std::partial_sum(v.slot_dims.begin(), v.slot_dims.end() - 1, off.begin() + 1);
    return off;
  };
  const auto p_off = offsets(pv), d_off = offsets(dv);

  nn::Checkpoint d;
  d.kind = EnvKind::DP;
  d.vocab = dv;
  d.net = p.net;
  d.net.language_in = dv.flat_size();
  d.params = nn::init_params<float>(d.net, seed);
  for (int i = 0; i < p.params.count(); ++i)
    if (i != nn::slot::kLangW) d.params[i] = p.params[i];

  // Fresh draws stay in the determiner columns; P columns are overwritten.
  auto& w = d.params[nn::slot::kLangW];
  const auto& pw = p.params[nn::slot::kLangW];
  for (std::size_t s = 0; s < kPSlotInDP.size(); ++s) {
    const int dst = kPSlotInDP[s];
    if (pv.slot_dims[s] != dv.slot_dims[static_cast<std::size_t>(dst)])
      throw std::logic_error("P and DP slot sizes disagree");
    w.middleCols(d_off[static_cast<std::size_t>(dst)], pv.slot_dims[s]) = pw.middleCols(p_off[s], pv.slot_dims[s]);
  }
  d.episodes = p.episodes;
  return d;
}

FinetuneResult finetune_dp(const std::filesystem::path& p_checkpoint, RunConfig cfg, const EvalOptions& eval,
                           std::ostream* log) {
  const nn::Checkpoint p = nn::load_checkpoint(p_checkpoint, vocab_sizes(EnvKind::P));
  nn::Checkpoint widened = widen_p_to_dp(p, cfg.init_seed);
  cfg.kind = EnvKind::DP;
  cfg.frame_size = widened.net.frame_size;
  cfg.schedule = CurriculumSchedule::preset("DP");
  cfg.train_split = SplitFilter::Train;

  FinetuneResult out;
  TrainOptions opts;
  opts.initial = std::move(widened.params);
  opts.log = log;
  out.train = train(cfg, opts);
  out.eval = evaluate_zero_shot(out.train.final_checkpoint, EnvKind::DP, eval);
  return out;
}

}  // namespace groundworld
