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

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "groundworld/trainer.hpp"

namespace groundworld {
namespace {

[[noreturn]] void fail(std::string_view key, std::string_view what) {
  throw std::runtime_error(fmt::format("config key '{}': {}", key, what));
}

template <typename T>
std::optional<T> get(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<T>()) return *v;
  fail(key, "wrong type");
}

std::uint64_t get_seed(const toml::table& t, std::string_view key, std::uint64_t fallback) {
  const auto v = get<std::int64_t>(t, key);
  if (!v) return fallback;
  if (*v < 0) fail(key, "must be non-negative");
  return static_cast<std::uint64_t>(*v);
}

template <typename E, typename Parse>
std::vector<E> get_list(const toml::table& t, std::string_view key, Parse parse) {
  std::vector<E> out;
  const toml::node* n = t.get(key);
  if (!n) return out;
  const toml::array* arr = n->as_array();
  if (!arr) fail(key, "expected an array of names");
  for (const auto& item : *arr) {
    const auto s = item.value<std::string>();
    if (!s) fail(key, "expected strings");
    const auto e = parse(*s);
    if (!e) fail(key, fmt::format("unknown name '{}'", *s));
    out.push_back(*e);
  }
  return out;
}

void check_keys(const toml::table& t, std::string_view where, std::initializer_list<std::string_view> allowed) {
  const std::set<std::string_view> ok(allowed);
  for (const auto& [k, v] : t)
    if (!ok.count(k.str())) fail(fmt::format("{}{}", where, k.str()), "unknown key");
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw std::runtime_error(fmt::format("config: {} (line {})", e.description(), e.source().begin.line));
  }
  check_keys(root, "", {"env_kind", "schedule", "stages", "split", "rule", "colors", "shapes", "layout",
                        "frame_size", "seeds", "budget", "checkpoint", "metrics", "a2c", "criterion", "window"});
  RunConfig cfg;
  if (auto v = get<std::string>(root, "env_kind")) {
    const auto k = parse_env_kind(*v);
    if (!k) fail("env_kind", fmt::format("unknown env kind '{}'", *v));
    cfg.kind = *k;
  }
  cfg.schedule = CurriculumSchedule::preset(cfg.kind == EnvKind::D ? "8D" : cfg.kind == EnvKind::P ? "8P" : "DP");
  if (auto v = get<std::string>(root, "schedule")) {
    try {
      cfg.schedule = CurriculumSchedule::preset(*v);
    } catch (const std::invalid_argument& e) {
      fail("schedule", e.what());
    }
  }
  if (const toml::node* n = root.get("stages")) {
    if (root.contains("schedule")) fail("stages", "give either 'schedule' or 'stages', not both");
    const toml::array* arr = n->as_array();
    if (!arr || arr->empty()) fail("stages", "expected a non-empty array of tables");
    cfg.schedule.stages.clear();
    for (const auto& item : *arr) {
      const toml::table* st = item.as_table();
      if (!st) fail("stages", "expected tables");
      check_keys(*st, "stages.", {"name", "determiners", "prepositions", "episode_cap"});
      CurriculumStage s;
      s.name = get<std::string>(*st, "name").value_or(fmt::format("stage{}", cfg.schedule.stages.size()));
      s.determiners = get_list<Determiner>(*st, "determiners", parse_determiner);
      s.prepositions = get_list<Preposition>(*st, "prepositions", parse_preposition);
      if (s.determiners.empty()) s.determiners.assign(kAllDeterminers.begin(), kAllDeterminers.end());
      if (s.prepositions.empty()) s.prepositions.assign(kAllPrepositions.begin(), kAllPrepositions.end());
      if (auto cap = get<std::int64_t>(*st, "episode_cap")) s.episode_cap = *cap;
      cfg.schedule.stages.push_back(std::move(s));
    }
  }
  if (auto v = get<double>(root, "criterion")) cfg.schedule.criterion = *v;
  if (auto v = get<std::int64_t>(root, "window")) cfg.schedule.window = static_cast<int>(*v);
  if (auto v = get<std::string>(root, "split")) {
    const auto f = parse_split_filter(*v);
    if (!f) fail("split", fmt::format("unknown split '{}'", *v));
    cfg.train_split = *f;
  }
  if (auto v = get<std::string>(root, "rule")) {
    const auto r = parse_rule(*v);
    if (!r) fail("rule", fmt::format("unknown rule '{}'", *v));
    cfg.rule = *r;
  }
  cfg.colors = get_list<Color>(root, "colors", parse_color);
  cfg.shapes = get_list<Shape>(root, "shapes", parse_shape);
  if (auto v = get<std::string>(root, "layout")) cfg.layout = *v;
  if (auto v = get<std::int64_t>(root, "frame_size")) cfg.frame_size = static_cast<int>(*v);

  if (const auto* t = root["seeds"].as_table()) {
    check_keys(*t, "seeds.", {"env", "init"});
    cfg.env_seed = get_seed(*t, "env", cfg.env_seed);
    cfg.init_seed = get_seed(*t, "init", cfg.init_seed);
  }
  if (const auto* t = root["budget"].as_table()) {
    check_keys(*t, "budget.", {"episodes", "steps"});
    if (auto v = get<std::int64_t>(*t, "episodes")) cfg.episode_budget = *v;
    if (auto v = get<std::int64_t>(*t, "steps")) cfg.step_budget = *v;
  }
  if (const auto* t = root["checkpoint"].as_table()) {
    check_keys(*t, "checkpoint.", {"every", "dir"});
    if (auto v = get<std::int64_t>(*t, "every")) cfg.checkpoint_every = *v;
    if (auto v = get<std::string>(*t, "dir")) cfg.out_dir = *v;
  }
  if (const auto* t = root["metrics"].as_table()) {
    check_keys(*t, "metrics.", {"wall_clock", "log_every", "window"});
    if (auto v = get<bool>(*t, "wall_clock")) cfg.record_wall_clock = *v;
    if (auto v = get<std::int64_t>(*t, "log_every")) cfg.log_every = *v;
    if (auto v = get<std::int64_t>(*t, "window")) cfg.metrics_window = static_cast<int>(*v);
  }
  if (const auto* t = root["a2c"].as_table()) {
    check_keys(*t, "a2c.", {"gamma", "n_step", "value_coef", "entropy_coef", "max_grad_norm", "learning_rate",
                            "rms_decay", "rms_eps", "workers"});
    auto& a = cfg.a2c;
    if (auto v = get<double>(*t, "gamma")) a.gamma = *v;
    if (auto v = get<std::int64_t>(*t, "n_step")) a.n_step = static_cast<int>(*v);
    if (auto v = get<double>(*t, "value_coef")) a.value_coef = *v;
    if (auto v = get<double>(*t, "entropy_coef")) a.entropy_coef = *v;
    if (auto v = get<double>(*t, "max_grad_norm")) a.max_grad_norm = *v;
    if (auto v = get<double>(*t, "learning_rate")) a.learning_rate = *v;
    if (auto v = get<double>(*t, "rms_decay")) a.rms_decay = *v;
    if (auto v = get<double>(*t, "rms_eps")) a.rms_eps = *v;
    if (auto v = get<std::int64_t>(*t, "workers")) a.workers = static_cast<int>(*v);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("config: {}", e.what()));
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_run_config(ss.str());
  apply_seed_override(cfg);
  return cfg;
}

bool apply_seed_override(RunConfig& cfg) {
  const char* env = std::getenv("GROUNDWORLD_SEED");
  if (!env || !*env) return false;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') throw std::runtime_error(fmt::format("GROUNDWORLD_SEED '{}' is not a seed", env));
  cfg.env_seed = cfg.init_seed = v;
  return true;
}

}  // namespace groundworld
