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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "groundworld/plot.hpp"
#include "groundworld/trainer.hpp"

using namespace groundworld;

namespace {

const std::filesystem::path kTiny = std::filesystem::path(GROUNDWORLD_TEST_DIR) / "data" / "tiny_run.toml";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig tiny(const std::string& out) {
  RunConfig cfg = load_run_config(kTiny);
  cfg.out_dir = std::filesystem::temp_directory_path() / out;
  std::filesystem::remove_all(cfg.out_dir);
  return cfg;
}

// Restores GROUNDWORLD_SEED on scope exit.
struct SeedEnv {
  std::optional<std::string> saved;
  explicit SeedEnv(const char* value) {
    if (const char* v = std::getenv("GROUNDWORLD_SEED")) saved = v;
    if (value) ::setenv("GROUNDWORLD_SEED", value, 1);
    else ::unsetenv("GROUNDWORLD_SEED");
  }
  ~SeedEnv() {
    if (saved) ::setenv("GROUNDWORLD_SEED", saved->c_str(), 1);
    else ::unsetenv("GROUNDWORLD_SEED");
  }
};

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("run files parse") {
    SeedEnv clear(nullptr);
    const RunConfig cfg = load_run_config(kTiny);
    CHECK(cfg.kind == EnvKind::D);
    CHECK(cfg.frame_size == 36);
    CHECK(cfg.layout == "pair");
    CHECK(cfg.schedule.stages.size() == 1);
    CHECK(cfg.schedule.stages[0].determiners == std::vector<Determiner>{Determiner::A, Determiner::Many});
    CHECK(cfg.env_seed == 5);
    CHECK(cfg.episode_budget == 24);
    CHECK(cfg.metrics_window == 10);
    CHECK(cfg.a2c.workers == 3);
    CHECK(cfg.a2c.gamma == 0.99);

    const RunConfig p = parse_run_config("env_kind = \"p\"\nschedule = \"2P->4P->8P\"\n[a2c]\nlearning_rate = 1e-3\n");
    CHECK(p.kind == EnvKind::P);
    CHECK(p.schedule.stages.size() == 3);
    CHECK(p.a2c.learning_rate == 1e-3);
  }

  TEST_CASE("shipped run files parse") {
    SeedEnv clear(nullptr);
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(GROUNDWORLD_TEST_DIR) / ".." / "configs")) {
      if (e.path().extension() != ".toml") continue;
      CAPTURE(e.path().string());
      CHECK_NOTHROW(load_run_config(e.path()));
      ++n;
    }
    CHECK(n >= 4);
    const RunConfig s = load_run_config(std::filesystem::path(GROUNDWORLD_TEST_DIR) / ".." / "configs" / "sanity.toml");
    CHECK(s.schedule.stages[0].determiners == std::vector<Determiner>{Determiner::A, Determiner::Many});
    CHECK(s.frame_size == 48);
  }

  TEST_CASE("bad run files name the problem") {
    auto err = [](const char* text) {
      try {
        parse_run_config(text);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(err("env_kind = \"q\"\n").find("env_kind") != std::string::npos);
    CHECK(err("typo = 1\n").find("typo") != std::string::npos);
    CHECK(err("[a2c]\ngama = 0.9\n").find("gama") != std::string::npos);
    CHECK(err("schedule = \"9D\"\n").find("schedule") != std::string::npos);
    CHECK_FALSE(err("env_kind = \n").empty());
    CHECK_FALSE(err("[a2c]\ngamma = 1.5\n").empty());
    CHECK_FALSE(err("frame_size = 20\n").empty());
    CHECK_THROWS(load_run_config("/nonexistent/run.toml"));
  }

  TEST_CASE("GROUNDWORLD_SEED overrides both seeds") {
    {
      SeedEnv env("77");
      const RunConfig cfg = load_run_config(kTiny);
      CHECK(cfg.env_seed == 77);
      CHECK(cfg.init_seed == 77);
    }
    {
      SeedEnv env("x1");
      RunConfig cfg;
      CHECK_THROWS(apply_seed_override(cfg));
    }
  }

  TEST_CASE("rolling window") {
    RollingWindow w(3);
    CHECK(w.success_rate() == 0.0);
    w.push(true, 10);
    w.push(false, -3);
    CHECK(w.success_rate() == doctest::Approx(0.5));
    w.push(true, 10);
    w.push(false, -10);  // evicts the first
    CHECK(w.success_rate() == doctest::Approx(1.0 / 3.0));
    CHECK(w.mean_reward() == doctest::Approx(-1.0));
  }

  TEST_CASE("action sampling follows the distribution") {
    std::mt19937_64 rng(1);
    Eigen::VectorXf p(4);
    p << 0.1f, 0.2f, 0.3f, 0.4f;
    std::array<int, 4> n{};
    for (int i = 0; i < 40000; ++i) ++n[static_cast<std::size_t>(sample_action(p, rng))];
    for (int a = 0; a < 4; ++a) CHECK(n[static_cast<std::size_t>(a)] / 40000.0 == doctest::Approx(p[a]).epsilon(0.05));
  }

  TEST_CASE("tiny runs are reproducible and log one row per episode") {
    SeedEnv clear(nullptr);
    const RunConfig a = tiny("gw_tiny_a"), b = tiny("gw_tiny_b");
    const TrainResult ra = train(a), rb = train(b);
    CHECK(ra.episodes >= 24);
    CHECK(ra.isolation_ok);
    const auto rows = read_metrics_csv(ra.metrics_path);
    CHECK(static_cast<std::int64_t>(rows.size()) == ra.episodes);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].episode == static_cast<std::int64_t>(i + 1));
    CHECK(slurp(ra.metrics_path) == slurp(rb.metrics_path));
    CHECK(slurp(ra.metrics_path).rfind(metrics_csv_header(), 0) == 0);

    // Independent rolling rate over the perfect column.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t lo = i + 1 >= 10 ? i + 1 - 10 : 0;
      int perfect = 0;
      for (std::size_t j = lo; j <= i; ++j) perfect += rows[j].perfect;
      CHECK(rows[i].success_rate == doctest::Approx(double(perfect) / double(i + 1 - lo)));
      CHECK(rows[i].perfect == (rows[i].reward == 10.0));
    }

    const auto summary = nlohmann::json::parse(slurp(a.out_dir / "summary.json"));
    CHECK(summary["train_test_isolation"] == true);
    const auto ck = nn::load_checkpoint(ra.final_checkpoint, vocab_sizes(EnvKind::D));
    CHECK(ck.episodes == ra.episodes);
    CHECK(nn::param_hash(ck.params) == nn::param_hash(nn::load_checkpoint(rb.final_checkpoint).params));
    std::filesystem::remove_all(a.out_dir);
    std::filesystem::remove_all(b.out_dir);
  }

  TEST_CASE("evaluation leaves the weights alone and reports mean and spread") {
    const auto net_cfg = nn::NetConfig::for_env(EnvKind::D, 36);
    const nn::Network<float> net(net_cfg, 3);
    const auto before = nn::param_hash(net.params());
    RunConfig rc;
    rc.frame_size = 36;
    const EnvConfig env = make_env_config(rc, SplitFilter::Test);
    EvalOptions opts;
    opts.episodes = 6;
    opts.repeats = 2;
    opts.batch = 3;
    const EvalResult r1 = evaluate(net, env, opts), r2 = evaluate(net, env, opts);
    CHECK(nn::param_hash(net.params()) == before);
    CHECK(r1.success_rates == r2.success_rates);
    CHECK(r1.episodes == 12);
    CHECK(r1.successes + r1.wrong_target + r1.timeouts == 12);
    CHECK(r1.perfect <= r1.successes);

    EvalResult e;
    e.mean = 76.123;
    e.sd = 0.987;
    CHECK(e.formatted() == "76.1 ± 0.99");

    RunConfig big;
    big.frame_size = 48;
    CHECK_THROWS_AS(evaluate(net, make_env_config(big, SplitFilter::Test), opts), std::invalid_argument);
  }

  TEST_CASE("widening P to DP copies P columns and seeds the determiner slots") {
    const auto pc = nn::NetConfig::for_env(EnvKind::P, 36);
    nn::Checkpoint p{EnvKind::P, vocab_sizes(EnvKind::P), pc, 10, "", nn::init_params<float>(pc, 4), std::nullopt};
    const nn::Checkpoint d = widen_p_to_dp(p, 9);
    CHECK(d.kind == EnvKind::DP);
    CHECK(d.net.language_in == vocab_sizes(EnvKind::DP).flat_size());
    const auto& pw = p.params[nn::slot::kLangW];
    const auto& dw = d.params[nn::slot::kLangW];
    // P: [colorA 8, shapeA 8, prep 8, colorB 8, shapeB 8]
    // DP: [detA 8, colorA 8, shapeA 8, prep 8, detB 8, colorB 8, shapeB 8]
    const auto pd = vocab_sizes(EnvKind::P).slot_dims, dd = vocab_sizes(EnvKind::DP).slot_dims;
    std::vector<int> po(pd.size(), 0), doff(dd.size(), 0);
    for (std::size_t i = 1; i < pd.size(); ++i) po[i] = po[i - 1] + pd[i - 1];
    for (std::size_t i = 1; i < dd.size(); ++i) doff[i] = doff[i - 1] + dd[i - 1];
    const std::array<int, 5> map{1, 2, 3, 5, 6};
    for (std::size_t s = 0; s < map.size(); ++s)
      CHECK(dw.middleCols(doff[static_cast<std::size_t>(map[s])], pd[s]) == pw.middleCols(po[s], pd[s]));
    const auto det_a = dw.middleCols(doff[0], dd[0]), det_b = dw.middleCols(doff[4], dd[4]);
    CHECK(det_a.cwiseAbs().maxCoeff() > 0.0f);
    CHECK(det_b.cwiseAbs().maxCoeff() > 0.0f);
    CHECK(det_a != det_b);
    for (int i = 0; i < p.params.count(); ++i)
      if (i != nn::slot::kLangW) CHECK(d.params[i] == p.params[i]);

    nn::Checkpoint wrong = p;
    wrong.kind = EnvKind::D;
    CHECK_THROWS_AS(widen_p_to_dp(wrong, 1), nn::CheckpointError);
  }
}

TEST_SUITE("plot") {
  std::vector<MetricsRow> ramp(int n, int stage_at) {
    std::vector<MetricsRow> rows;
    for (int i = 1; i <= n; ++i) rows.push_back({i, i >= stage_at ? 1 : 0, double(i) / n, 0.0, 10, 0.0, false, 0.0});
    return rows;
  }

  TEST_CASE("empty input is an error") {
    CHECK_THROWS_WITH_AS(plot_curves({}, {}), "empty metrics: nothing to plot", std::invalid_argument);
    CHECK_THROWS_AS(plot_curves({{"x", {}}}, {}), std::invalid_argument);
  }

  TEST_CASE("thinning keeps the ends") {
    CHECK(thin_indices(5, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    const auto t = thin_indices(10001, 11);
    CHECK(t.size() == 11);
    CHECK(t.front() == 0);
    CHECK(t.back() == 10000);
    CHECK(t[5] == 5000);
  }

  TEST_CASE("two series overlay on one image") {
    const std::vector<PlotSeries> one{{"a", ramp(3000, 1500)}};
    const std::vector<PlotSeries> two{{"a", ramp(3000, 1500)}, {"b", ramp(2000, 99999)}};
    PlotConfig cfg;
    const Frame f1 = plot_curves(one, cfg), f2 = plot_curves(two, cfg);
    CHECK(f1.width == cfg.width);
    CHECK(f1 != f2);
    const auto pts = plot_points(two, cfg);
    CHECK(pts.front().series == 0);
    CHECK(pts.back().series == 1);
    CHECK(pts.back().episode == 2000);
    const std::string csv = plot_points_csv(two, pts);
    CHECK(csv.rfind("series,label,episode,stage,success_rate\n", 0) == 0);
    CHECK(csv.find("\n1,b,2000,0,") != std::string::npos);
  }

  TEST_CASE("text rendering") {
    Frame f(100, 20);
    draw_text(f, 0, 0, "A1", {0, 0, 0});
    CHECK(text_width("A1") == 11);
    CHECK(text_width("ab", 2) == 2 * text_width("AB"));
  }
}
