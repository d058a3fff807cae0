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

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "groundworld/env.hpp"
#include "groundworld/plot.hpp"
#include "groundworld/protocol.hpp"
#include "groundworld/trainer.hpp"

using namespace groundworld;

namespace {

std::atomic<bool> g_stop{false};

EnvKind kind_arg(const std::string& s) {
  const auto k = parse_env_kind(s);
  if (!k) throw CLI::ValidationError("--env", fmt::format("unknown env kind '{}' (d, p, dp)", s));
  return *k;
}

SplitFilter split_arg(const std::string& s) {
  const auto f = parse_split_filter(s);
  if (!f) throw CLI::ValidationError("--split", fmt::format("unknown split '{}' (train, test, all)", s));
  return *f;
}

EnvConfig env_for(EnvKind kind, SplitFilter split, int stage, int size) {
  protocol::ResetRequest r;
  r.kind = kind;
  r.split = split;
  r.stage = stage;
  EnvConfig cfg = r.env_config();
  cfg.render.camera.width = cfg.render.camera.height = size;
  return cfg;
}

void print_train(const TrainResult& r) {
  for (std::size_t i = 0; i < r.stage_episode_counts.size(); ++i)
    fmt::print("stage {} ({}): criterion after {} episodes ({:.3f}M)\n", i, r.stage_names[i],
               r.stage_episode_counts[i], static_cast<double>(r.stage_episode_counts[i]) / 1e6);
  fmt::print("episodes {} steps {} updates {} final_success {:.3f} {}\n", r.episodes, r.steps, r.updates,
             r.final_success, r.completed ? "completed" : (r.budget_exhausted ? "budget exhausted" : "stopped"));
  fmt::print("checkpoint {}\nmetrics {}\n", r.final_checkpoint.string(), r.metrics_path.string());
}

void print_eval(const EvalResult& e, EnvKind kind) {
  fmt::print("env {} test split: success {} % over {} repeats (", name(kind), e.formatted(), e.success_rates.size());
  for (std::size_t i = 0; i < e.success_rates.size(); ++i) fmt::print("{}{:.1f}", i ? ", " : "", e.success_rates[i]);
  fmt::print(")\nmean_reward {:.3f} reached_target {} wrong_target {} timeout {} episodes {}\n", e.mean_reward,
             e.successes, e.wrong_target, e.timeouts, e.episodes);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"groundworld: determiner and preposition navigation environments"};
  app.require_subcommand(1);

  // counts
  auto* counts = app.add_subcommand("counts", "Instruction counts per env kind against the stated figures");
  std::string splits_dir;
  bool counts_machine = false;
  counts->add_option("--splits", splits_dir, "Directory with d_split.csv and p_split.csv");
  counts->add_flag("--machine", counts_machine, "key=value rows instead of a table");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate scenes as JSON lines");
  std::string gen_env = "d", gen_split = "train", gen_out;
  std::uint64_t gen_seed = 0;
  int gen_count = 1, gen_stage = 8;
  bool gen_verdicts = false;
  gen->add_option("--env", gen_env, "d, p or dp");
  gen->add_option("--split", gen_split, "train, test or all");
  gen->add_option("--stage", gen_stage, "Concept subset size (2, 4, 8)");
  gen->add_option("--seed", gen_seed, "First episode seed");
  gen->add_option("--count", gen_count, "Number of scenes (seeds seed..seed+count-1)")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output file (default stdout)");
  gen->add_flag("--verdicts", gen_verdicts, "Append oracle verdicts per option");

  // render
  auto* ren = app.add_subcommand("render", "Render the first-person frame of an episode");
  std::string ren_env = "d", ren_split = "train", ren_out = "frame.png", ren_actions;
  std::uint64_t ren_seed = 0;
  int ren_size = 128, ren_stage = 8;
  ren->add_option("--env", ren_env, "d, p or dp");
  ren->add_option("--split", ren_split, "train, test or all");
  ren->add_option("--stage", ren_stage, "Concept subset size (2, 4, 8)");
  ren->add_option("--seed", ren_seed, "Episode seed");
  ren->add_option("--size", ren_size, "Frame side in pixels");
  ren->add_option("--actions", ren_actions, "Comma-separated actions to take first (forward,turn_left,...)");
  ren->add_option("--out", ren_out, "PNG path");

  // train
  auto* tr = app.add_subcommand("train", "Curriculum A2C training");
  std::string tr_config;
  tr->add_option("--config", tr_config, "TOML run file")->required()->check(CLI::ExistingFile);

  // eval
  auto* ev = app.add_subcommand("eval", "Zero-shot evaluation on the Test split");
  std::string ev_ckpt, ev_env = "d";
  EvalOptions ev_opts;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--env", ev_env, "d, p or dp");
  ev->add_option("--n", ev_opts.episodes, "Episodes per repeat")->check(CLI::PositiveNumber);
  ev->add_option("--repeats", ev_opts.repeats, "Repeats")->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_opts.seed, "Evaluation seed");
  ev->add_option("--batch", ev_opts.batch, "Environments stepped together")->check(CLI::PositiveNumber);
  ev->add_flag("--greedy", ev_opts.greedy, "Argmax actions instead of sampling");

  // finetune-dp
  auto* ft = app.add_subcommand("finetune-dp", "Widen a P agent to DP and finetune it");
  std::string ft_from, ft_config, ft_out = "run_dp";
  std::int64_t ft_episodes = 100'000;
  EvalOptions ft_eval;
  ft_eval.repeats = 1;
  ft->add_option("--from", ft_from, "P checkpoint")->required()->check(CLI::ExistingFile);
  ft->add_option("--episodes", ft_episodes, "Finetuning budget")->check(CLI::PositiveNumber);
  ft->add_option("--config", ft_config, "TOML run file for seeds and A2C settings")->check(CLI::ExistingFile);
  ft->add_option("--out", ft_out, "Output directory (overrides the config)");
  ft->add_option("--eval-n", ft_eval.episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

  // plot
  auto* pl = app.add_subcommand("plot", "Learning curves from metrics files");
  std::vector<std::string> pl_in, pl_labels;
  std::string pl_out = "curves.png";
  PlotConfig pl_cfg;
  pl->add_option("--in", pl_in, "metrics.csv (repeatable)")->required()->check(CLI::ExistingFile);
  pl->add_option("--label", pl_labels, "Curve label per input");
  pl->add_option("--out", pl_out, "PNG path; points go to <out>.csv");
  pl->add_option("--title", pl_cfg.title, "Title");

  // serve
  auto* sv = app.add_subcommand("serve", "Serve environments over JSON lines");
  int sv_port = 5555;
  std::string sv_host = "127.0.0.1";
  bool sv_stdio = false;
  sv->add_option("--port", sv_port, "TCP port (0 picks one)");
  sv->add_option("--host", sv_host, "IPv4 address to bind");
  sv->add_flag("--stdio", sv_stdio, "One session on stdin/stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*counts) {
      const SplitTables tables = splits_dir.empty() ? SplitTables{} : SplitTables::load(splits_dir);
      std::vector<CountRow> rows;
      for (EnvKind k : kAllEnvKinds)
        for (DistinctnessRule r : {DistinctnessRule::DifferBoth, DistinctnessRule::DifferPair})
          rows.push_back(count_report(k, r, tables));
      std::cout << (counts_machine ? format_count_rows(rows) : format_count_table(rows));
    } else if (*gen) {
      Env env(env_for(kind_arg(gen_env), split_arg(gen_split), gen_stage, 128));
      std::ofstream file;
      if (!gen_out.empty()) {
        file.open(gen_out, std::ios::binary | std::ios::trunc);
        if (!file) throw std::runtime_error(fmt::format("cannot write {}", gen_out));
      }
      std::ostream& out = gen_out.empty() ? std::cout : file;
      for (int i = 0; i < gen_count; ++i) {
        env.reset(gen_seed + static_cast<std::uint64_t>(i));
        out << serialize(env.state().scene, gen_verdicts) << '\n';
      }
    } else if (*ren) {
      Env env(env_for(kind_arg(ren_env), split_arg(ren_split), ren_stage, ren_size));
      StepResult r = env.reset(ren_seed);
      std::stringstream ss(ren_actions);
      for (std::string tok; std::getline(ss, tok, ',');) {
        if (tok.empty()) continue;
        const auto a = parse_action(tok);
        if (!a) throw std::invalid_argument(fmt::format("unknown action '{}'", tok));
        if (r.done) break;
        r = env.step(*a);
      }
      write_png(ren_out, r.observation.frame);
      fmt::print("{}\n{}\n", r.observation.text, ren_out);
    } else if (*tr) {
      const RunConfig cfg = load_run_config(tr_config);
      const auto net = nn::NetConfig::for_env(cfg.kind, cfg.frame_size);
      fmt::print("env {} schedule {} parameters {}\n", name(cfg.kind), cfg.schedule.label(),
                 nn::ParamSet<float>::zeros(net).scalar_count());
      print_train(train(cfg, {std::nullopt, &std::cerr}));
    } else if (*ev) {
      const EnvKind kind = kind_arg(ev_env);
      print_eval(evaluate_zero_shot(ev_ckpt, kind, ev_opts), kind);
    } else if (*ft) {
      RunConfig cfg = ft_config.empty() ? RunConfig{} : load_run_config(ft_config);
      if (ft_config.empty()) apply_seed_override(cfg);
      cfg.kind = EnvKind::DP;
      cfg.schedule = CurriculumSchedule::preset("DP");
      cfg.episode_budget = ft_episodes;
      if (!ft_out.empty()) cfg.out_dir = ft_out;
      const FinetuneResult r = finetune_dp(ft_from, cfg, ft_eval, &std::cerr);
      print_train(r.train);
      print_eval(r.eval, EnvKind::DP);
    } else if (*pl) {
      std::vector<std::filesystem::path> inputs(pl_in.begin(), pl_in.end());
      plot_files(inputs, pl_labels, pl_out, pl_cfg);
      fmt::print("{}\n{}.csv\n", pl_out, pl_out);
    } else if (*sv) {
      if (sv_stdio) {
        std::ios::sync_with_stdio(false);
        protocol::serve_stream(std::cin, std::cout);
      } else {
        std::signal(SIGINT, [](int) { g_stop = true; });
        std::signal(SIGTERM, [](int) { g_stop = true; });
        protocol::serve_tcp(
            sv_host, sv_port, [&](int port) { std::cerr << fmt::format("listening on {}:{}\n", sv_host, port); },
            g_stop);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
