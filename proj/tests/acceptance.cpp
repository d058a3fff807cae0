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

// Acceptance run: one PASS/FAIL line per primary criterion.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "groundworld/env.hpp"
#include "groundworld/grammar.hpp"
#include "groundworld/nn/checkpoint.hpp"
#include "groundworld/scene.hpp"
#include "groundworld/semantics.hpp"
#include "groundworld/trainer.hpp"
#include "support/drive.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace groundworld;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path test_dir = GROUNDWORLD_TEST_DIR;
  fs::path learning_metrics;
  fs::path learning_config;
  std::int64_t learning_verify = 0;
  bool learning_train = false;
  int chance_episodes = 1000;
  std::uint64_t chance_seed = 1;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gw_accept_" + name);
  fs::remove_all(p);
  return p;
}

EnvConfig env_config(EnvKind kind, SplitFilter split, int size) {
  RunConfig rc;
  rc.kind = kind;
  rc.schedule = CurriculumSchedule::preset(kind == EnvKind::D ? "8D" : kind == EnvKind::P ? "8P" : "DP");
  rc.frame_size = size;
  return make_env_config(rc, split);
}

// ---------------------------------------------------------------------------

Verdict grammar_counts(const Options&) {
  GrammarConfig g;
  const auto d = enumerate_instructions(g).size();
  g.kind = EnvKind::P;
  g.rule = DistinctnessRule::DifferBoth;
  const auto pb = enumerate_instructions(g).size();
  g.rule = DistinctnessRule::DifferPair;
  const auto pp = enumerate_instructions(g).size();
  const auto bb = testing::brute_force_p(DistinctnessRule::DifferBoth);
  const auto bp = testing::brute_force_p(DistinctnessRule::DifferPair);
  const auto p_row = count_report(EnvKind::P, DistinctnessRule::DifferBoth);
  const auto dp_row = count_report(EnvKind::DP, DistinctnessRule::DifferBoth);
  const bool flagged = !p_row.matches_stated() && p_row.stated_total == 6000 && !dp_row.matches_stated() &&
                       dp_row.stated_total == 160000 && dp_row.total == testing::kDpDetPrep * 400;
  return {d == 200 && std::int64_t(pb) == bb && bb == 3200 && std::int64_t(pp) == bp && bp == 4800 && flagged,
          fmt::format("D {}; P {}/{} (brute force {}/{}); stated P 6000 and DP 160000 flagged against {} and {}", d,
                      pb, pp, bb, bp, p_row.total, dp_row.total)};
}

Verdict split_conformance(const Options&) {
  const int dm = testing::grid_mismatches(SplitTable::determiner_default(), testing::kDeterminerGrid);
  const int pm = testing::grid_mismatches(SplitTable::preposition_default(), testing::kPrepositionGrid);
  bool quarter = SplitTable::determiner_default().test_fraction() == 0.25 &&
                 SplitTable::preposition_default().test_fraction() == 0.25;
  std::string fractions;
  for (EnvKind k : {EnvKind::D, EnvKind::P}) {
    GrammarConfig g;
    g.kind = k;
    const auto all = enumerate_instructions(g);
    std::size_t test = 0;
    for (const auto& i : all) test += membership(i) == SplitLabel::Test;
    quarter = quarter && 4 * test == all.size();
    fractions += fmt::format(" {} {}/{}", name(k), test, all.size());
  }
  return {dm == 0 && pm == 0 && quarter,
          fmt::format("40/40 cells each ({} and {} mismatches); test instructions{}", dm, pm, fractions)};
}

Verdict reward_machine(const Options&) {
  EnvConfig cfg = env_config(EnvKind::D, SplitFilter::All, 32);
  Env env(cfg);
  std::set<double> seen;
  bool ok = cfg.t_max == 500;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    env.reset(seed);
    const auto& s = env.state().scene;
    const auto r = testing::walk_to(env, s.room.anchors[s.target.location]);
    ok = ok && r.reward == 10.0 && r.info.outcome == Outcome::Success;
    seen.insert(r.reward);
    env.reset(seed);
    const auto w = testing::walk_to(env, s.room.anchors[s.distractors.at(0).location]);
    ok = ok && w.reward == -3.0 && w.info.outcome == Outcome::WrongTarget;
    seen.insert(w.reward);
  }
  env.reset(1);
  for (int i = 0; i < 12; ++i) env.step(Action::TurnLeft);
  StepResult bump;
  for (int i = 0; i < 40 && !bump.info.hit_wall; ++i) bump = env.step(Action::Forward);
  ok = ok && bump.info.hit_wall && bump.reward == -1.0;
  seen.insert(bump.reward);
  env.reset(2);
  const double worst = testing::wall_until_timeout(env);
  ok = ok && env.state().step == 500 && env.state().outcome == Outcome::Timeout;
  seen.insert(reward::kTimeout);
  bool threw = false;
  try {
    env.step(Action::Forward);
  } catch (const std::logic_error&) {
    threw = true;
  }

  // Random policy: totals stay inside the bounds.
  std::mt19937_64 rng(3);
  double lo = 1e9, hi = -1e9;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    env.reset(100 + seed);
    while (!env.state().terminated()) env.step(static_cast<Action>(rng() % 4));
    lo = std::min(lo, env.state().total_reward);
    hi = std::max(hi, env.state().total_reward);
  }
  ok = ok && threw && worst >= -510.0 && lo >= -510.0 && hi <= 10.0 && seen == std::set<double>{-10, -3, -1, 10};
  return {ok, fmt::format("+10/-3/-1/-10 observed, timeout at step 500, wall-hugging total {}, random totals in "
                          "[{}, {}], step after done refused",
                          worst, lo, hi)};
}

Verdict exactly_one_target(const Options&) {
  std::string detail;
  bool ok = true;
  for (EnvKind k : kAllEnvKinds) {
    GrammarConfig g;
    g.kind = k;
    const InstructionPool pool(g, SplitFilter::All);
    SceneConfig cfg;
    cfg.vocab = g;
    std::mt19937_64 rng(1000 + id(k));
    int good = 0, independent = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const SceneSpec s = build_scene(pool.sample(rng), rng(), cfg);
      const auto v = verdicts(s);
      good += v.size() == 4 && v[0] && std::count(v.begin(), v.end(), true) == 1;
      if (k == EnvKind::D) {
        const auto& instr = std::get<DInstruction>(s.instruction);
        bool agree = testing::d_oracle(instr, s.target.group.objects, s.reference_man());
        for (const auto& d : s.distractors) agree = agree && !testing::d_oracle(instr, d.group.objects, s.reference_man());
        independent += agree;
      }
    }
    ok = ok && good == n && (k != EnvKind::D || independent == n);
    detail += fmt::format("{} {}/{}; ", name(k), good, n);
    if (k == EnvKind::D) detail += fmt::format("D independent oracle {}/{}; ", independent, n);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Verdict determiner_partition(const Options&) {
  const std::array<Determiner, 4> q{Determiner::A, Determiner::Few, Determiner::Some, Determiner::Many};
  SpatialParams sp;
  const Vec3 man(6.0, 0.0, 0.6);
  std::string counts;
  bool ok = true;
  for (int n = 1; n <= 9; ++n) {
    ObjectGroup g{{Color::Red, Shape::Cube}, {}};
    for (int i = 0; i < n; ++i) g.placements.emplace_back(3.0 + 0.5 * (i % 3), 0.3, 4.0 + 0.5 * (i / 3));
    int accepted = 0;
    Determiner which{};
    for (Determiner d : q)
      if (satisfies_determiner(g, d, man, sp)) {
        ++accepted;
        which = d;
      }
    ok = ok && accepted == 1 && testing::count_fits(which, n) && quantity_class(n) == which;
    counts += fmt::format("{}:{} ", n, accepted == 1 ? std::string(name(which)) : "?");
  }
  counts.pop_back();
  return {ok, counts};
}

Verdict spatial_predicates(const Options&) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> xz(-0.4, 0.4), y(0.3, 2.0), depth(-1.5, 1.5);
  SpatialParams sp;
  auto at = [](Vec3 p) { return ObjectGroup{{Color::Red, Shape::Cube}, {p}}; };
  int violations = 0;
  const int pairs = 10000;
  for (int k = 0; k < pairs; ++k) {
    const auto a = at({xz(rng), y(rng), depth(rng)}), b = at({xz(rng), y(rng), depth(rng)});
    const bool ab = satisfies_preposition(a, Preposition::Above, b, sp);
    const bool ba = satisfies_preposition(b, Preposition::Above, a, sp);
    const bool fb = satisfies_preposition(a, Preposition::InFrontOf, b, sp);
    const bool bf = satisfies_preposition(b, Preposition::InFrontOf, a, sp);
    violations += (ab && ba) || ab != satisfies_preposition(b, Preposition::Below, a, sp);
    violations += (fb && bf) || fb != satisfies_preposition(b, Preposition::Behind, a, sp);
  }
  SceneConfig cfg;
  const Vec3 anchor(3.0, 0.0, 4.0);
  int placed = 0, passed = 0;
  for (Preposition p : {Preposition::Between, Preposition::Among})
    for (int nb = 2; nb <= 9; ++nb)
      for (int rep = 0; rep < 100; ++rep) {
        const auto pl = place_relation(p, 1, nb, anchor, rng, cfg);
        std::vector<Vec3> all = pl.a;
        all.insert(all.end(), pl.b.begin(), pl.b.end());
        ++placed;
        passed += satisfies_preposition(ObjectGroup{{Color::Red, Shape::Cube}, pl.a}, p,
                                        ObjectGroup{{Color::Blue, Shape::Sphere}, pl.b}, cfg.params) &&
                  non_overlapping(all, cfg.params.object_radius) && inside_block(all, anchor, cfg.room.cell);
      }
  return {violations == 0 && passed == placed,
          fmt::format("{} antisymmetry violations over {} pairs; Between/Among {}/{} placements pass", violations,
                      pairs, passed, placed)};
}

Verdict architecture_shapes(const Options&) {
  using namespace groundworld::nn;
  const NetConfig cfg = NetConfig::for_env(EnvKind::D);
  Network<float> net(cfg, 1);
  const MatX<float> frames = MatX<float>::Constant(3 * 128 * 128, 2, 0.5f);
  MatX<float> lang = MatX<float>::Zero(cfg.language_in, 2);
  lang(0, 0) = lang(1, 1) = 1.0f;
  const auto k = net.forward(frames, lang, LstmState<float>::zeros(cfg.hidden, 2));
  const int last = cfg.sides().back();
  const bool ok = cfg.convs.back().out_channels == 64 && last == 7 && k.features.rows() == 3136 &&
                  k.language.rows() == 128 && cfg.mix_in() == 3264 && k.mix.rows() == 256 && k.probs.rows() == 4 &&
                  k.value.rows() == 1;
  return {ok, fmt::format("conv {}x{}x{} -> {}; language {}; mix {} -> {}; policy {}; value {}",
                          cfg.convs.back().out_channels, last, last, k.features.rows(), k.language.rows(),
                          cfg.mix_in(), k.mix.rows(), k.probs.rows(), k.value.rows())};
}

Verdict gradient_correctness(const Options&) {
  double worst = 0.0;
  std::string at;
  bool alive = true;
  for (std::uint64_t seed : {7u, 21u}) {
    for (const auto& e : testing::gradient_check(seed)) {
      if (e.relative > worst) {
        worst = e.relative;
        at = e.name;
      }
      alive = alive && e.largest > 0.0;
    }
  }
  return {worst < 1e-4 && alive,
          fmt::format("max relative error {:.2e}{} over all {} tensors, 2 seeds, full A2C loss in double", worst,
                      at.empty() ? "" : " (" + at + ")", nn::slot::kCount)};
}

// Rolling success over full windows of 1000, recomputed from `perfect`.
std::optional<std::int64_t> first_above(const std::vector<MetricsRow>& rows, double threshold, double& best) {
  int hits = 0;
  best = 0.0;
  std::optional<std::int64_t> first;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    hits += rows[i].perfect;
    if (i >= 1000) hits -= rows[i - 1000].perfect;
    if (i + 1 < 1000) continue;
    const double rate = hits / 1000.0;
    best = std::max(best, rate);
    if (!first && rate > threshold) first = rows[i].episode;
  }
  return first;
}

bool same_row(const MetricsRow& a, const MetricsRow& b) {
  return a.episode == b.episode && a.stage == b.stage && a.success_rate == b.success_rate &&
         a.mean_reward == b.mean_reward && a.steps == b.steps && a.reward == b.reward && a.perfect == b.perfect;
}

Verdict learning_sanity(const Options& o) {
  std::vector<MetricsRow> rows;
  std::string source;
  if (o.learning_train) {
    if (o.learning_config.empty()) return {false, "--learning-train needs --learning-config"};
    RunConfig cfg = load_run_config(o.learning_config);
    cfg.out_dir = scratch("learning");
    cfg.log_every = 0;
    const TrainResult r = train(cfg, {std::nullopt, &std::cerr});
    rows = read_metrics_csv(r.metrics_path);
    source = fmt::format("fresh run of {}", o.learning_config.filename().string());
  } else if (!o.learning_metrics.empty() && fs::exists(o.learning_metrics)) {
    rows = read_metrics_csv(o.learning_metrics);
    source = fmt::format("recorded run {}", o.learning_metrics.filename().string());
    if (o.learning_verify > 0) {
      if (o.learning_config.empty()) return {false, "--learning-verify needs --learning-config"};
      RunConfig cfg = load_run_config(o.learning_config);
      cfg.out_dir = scratch("learning_verify");
      cfg.log_every = 0;
      cfg.episode_budget = o.learning_verify;
      const auto fresh = read_metrics_csv(train(cfg).metrics_path);
      const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(o.learning_verify), fresh.size());
      if (rows.size() < n) return {false, "recorded run is shorter than the verification prefix"};
      for (std::size_t i = 0; i < n; ++i)
        if (!same_row(rows[i], fresh[i]))
          return {false, fmt::format("recorded run diverges from a fresh run at episode {}", i + 1)};
      source += fmt::format(", first {} episodes reproduced", n);
      fs::remove_all(cfg.out_dir);
    }
  } else {
    return {false, "no learning evidence: pass --learning-metrics or --learning-train"};
  }
  double best = 0.0;
  const auto first = first_above(rows, 0.6, best);
  const bool ok = first && *first <= 50000;
  return {ok, fmt::format("{}: rolling success (window 1000) first above 60% at episode {}, best {:.1f}% over {} "
                          "episodes",
                          source, first ? std::to_string(*first) : "never", 100.0 * best, rows.size())};
}

Verdict chance_level(const Options& o) {
  const nn::Network<float> net(nn::NetConfig::for_env(EnvKind::D), 1);
  EvalOptions opts;
  opts.episodes = o.chance_episodes;
  opts.repeats = 1;
  opts.seed = o.chance_seed;
  const EvalResult r = evaluate(net, env_config(EnvKind::D, SplitFilter::Test, 128), opts);
  const double pct = 100.0 * static_cast<double>(r.perfect) / static_cast<double>(r.episodes);
  const double reached = 100.0 * static_cast<double>(r.successes) / static_cast<double>(r.episodes);
  return {std::abs(pct - 25.0) <= 3.0,
          fmt::format("untrained agent on D test: {:.1f}% success over {} episodes (target reached {:.1f}%, wrong "
                      "target {:.1f}%, timeout {:.1f}%); expected 25 +/- 3",
                      pct, r.episodes, reached, 100.0 * r.wrong_target / double(r.episodes),
                      100.0 * r.timeouts / double(r.episodes))};
}

Verdict determinism(const Options& o) {
  // Scenes.
  int scene_diff = 0;
  for (EnvKind k : kAllEnvKinds) {
    Env a(env_config(k, SplitFilter::All, 32)), b(env_config(k, SplitFilter::All, 32));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      a.reset(seed);
      b.reset(seed);
      scene_diff += serialize(a.state().scene, true) != serialize(b.state().scene, true);
    }
  }
  // Frames against the golden images.
  int golden_diff = 0;
  for (EnvKind k : kAllEnvKinds) {
    EnvConfig cfg = env_config(k, SplitFilter::All, 64);
    cfg.split = SplitFilter::All;
    cfg.render.tessellation = {16, 16};
    Env env(cfg);
    const Frame f = env.reset(2026).observation.frame;
    const fs::path path = o.test_dir / "golden" / ("reset_" + std::string(name(k)) + ".png");
    if (!fs::exists(path) || read_png(path) != f) ++golden_diff;
  }
  // Metrics of two identical runs.
  RunConfig cfg = load_run_config(o.test_dir / "data" / "tiny_run.toml");
  cfg.out_dir = scratch("det_a");
  const auto ma = slurp(train(cfg).metrics_path);
  fs::remove_all(cfg.out_dir);
  cfg.out_dir = scratch("det_b");
  const auto mb = slurp(train(cfg).metrics_path);
  fs::remove_all(cfg.out_dir);
  // Checkpoint round trip.
  const auto nc = nn::NetConfig::for_env(EnvKind::P, 36);
  const nn::Network<float> net(nc, 5);
  const fs::path ck = scratch("det.ckpt");
  nn::save_checkpoint(ck, {EnvKind::P, vocab_sizes(EnvKind::P), nc, 0, "", net.params(), std::nullopt});
  const auto back = nn::load_checkpoint(ck, vocab_sizes(EnvKind::P));
  fs::remove(ck);
  const nn::Network<float> again(back.net, back.params);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const nn::MatX<float> frames = nn::MatX<float>::NullaryExpr(3 * 36 * 36, 2, [&] { return u(rng); });
  nn::MatX<float> lang = nn::MatX<float>::Zero(nc.language_in, 2);
  lang(0, 0) = lang(3, 1) = 1.0f;
  const auto s = nn::LstmState<float>::zeros(nc.hidden, 2);
  const auto ka = net.forward(frames, lang, s), kb = again.forward(frames, lang, s);
  const bool bitwise = ka.probs == kb.probs && ka.value == kb.value && ka.h == kb.h;
  return {scene_diff == 0 && golden_diff == 0 && ma == mb && !ma.empty() && bitwise,
          fmt::format("scene diffs {}/150, golden frame diffs {}/3, metrics files {} ({} bytes), checkpoint forward {}",
                      scene_diff, golden_diff, ma == mb ? "identical" : "differ", ma.size(),
                      bitwise ? "bitwise equal" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks, one line per criterion"};
  Options o;
  std::vector<std::string> only, expect_fail;
  std::string test_dir = o.test_dir.string(), metrics, config;
  app.add_option("--only", only, "Run only these criteria");
  app.add_option("--expect-fail", expect_fail, "Criteria whose failure is recorded as known");
  app.add_option("--test-dir", test_dir, "Directory with golden/ and data/");
  app.add_option("--learning-metrics", metrics, "metrics.csv of the reduced-scale run");
  app.add_option("--learning-config", config, "TOML of the reduced-scale run");
  app.add_option("--learning-verify", o.learning_verify, "Re-run this many episodes and compare with the record");
  app.add_flag("--learning-train", o.learning_train, "Train the reduced-scale run instead of reading a record");
  app.add_option("--chance-episodes", o.chance_episodes, "Episodes for the untrained-agent control");
  app.add_option("--chance-seed", o.chance_seed, "Evaluation seed for the untrained-agent control");
  CLI11_PARSE(app, argc, argv);
  o.test_dir = test_dir;
  o.learning_metrics = metrics;
  o.learning_config = config;

  const std::vector<std::pair<std::string, std::function<Verdict(const Options&)>>> criteria = {
      {"grammar_counts", grammar_counts},
      {"split_conformance", split_conformance},
      {"reward_machine", reward_machine},
      {"exactly_one_target", exactly_one_target},
      {"determiner_partition", determiner_partition},
      {"spatial_predicates", spatial_predicates},
      {"architecture_shapes", architecture_shapes},
      {"gradient_correctness", gradient_correctness},
      {"learning_sanity", learning_sanity},
      {"chance_level", chance_level},
      {"determinism", determinism},
  };
  for (const auto& k : only)
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == k; })) {
      std::cerr << "unknown criterion " << k << '\n';
      return 2;
    }

  int passed = 0, failed = 0, known = 0;
  for (const auto& [key, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), key) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run(o);
    } catch (const std::exception& e) {
      v = {false, fmt::format("error: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool expected = std::find(expect_fail.begin(), expect_fail.end(), key) != expect_fail.end();
    std::string note;
    if (!v.pass && expected) note = " [known failure]";
    fmt::print("{} {}: {} ({:.1f} s){}\n", v.pass ? "PASS" : "FAIL", key, v.detail, secs, note);
    std::fflush(stdout);
    if (v.pass) ++passed;
    else if (expected) ++known;
    else ++failed;
  }
  fmt::print("acceptance: {} passed, {} failed, {} known failures\n", passed, failed + known, known);
  return failed == 0 ? 0 : 1;
}
