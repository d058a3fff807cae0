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

#include "groundworld/grammar.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace groundworld {

namespace {

template <typename E>
std::vector<E> sorted_unique(std::vector<E> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename E>
bool contains(const std::vector<E>& v, E e) {
  return std::find(v.begin(), v.end(), e) != v.end();
}

std::vector<ObjectPhrase> objects(const GrammarConfig& cfg) {
  std::vector<ObjectPhrase> out;
  for (Color c : sorted_unique(cfg.colors))
    for (Shape s : sorted_unique(cfg.shapes)) out.push_back({c, s});
  return out;
}

bool object_in(const GrammarConfig& cfg, const ObjectPhrase& o) {
  return contains(cfg.colors, o.color) && contains(cfg.shapes, o.shape);
}

}  // namespace

void GrammarConfig::validate() const {
  if (determiners.empty() || prepositions.empty() || colors.empty() || shapes.empty())
    throw std::invalid_argument("grammar subsets must be non-empty");
}

bool dp_feasible(Determiner det_a, Preposition prep, Determiner det_b) noexcept {
  if ((is_near(det_a) && is_far(det_b)) || (is_far(det_a) && is_near(det_b))) return false;
  if (is_multi_instance(prep)) return count_range(det_a).hi == 1 && count_range(det_b).lo >= 2;
  return true;
}

bool admits(const GrammarConfig& cfg, const Instruction& instr) {
  if (kind_of(instr) != cfg.kind) return false;
  struct Visitor {
    const GrammarConfig& c;
    bool operator()(const DInstruction& i) const {
      return contains(c.determiners, i.det) && object_in(c, i.obj);
    }
    bool operator()(const PInstruction& i) const {
      return contains(c.prepositions, i.prep) && object_in(c, i.object_a) &&
             object_in(c, i.object_b) && objects_distinct(i.object_a, i.object_b, c.rule);
    }
    bool operator()(const DPInstruction& i) const {
      return contains(c.determiners, i.det_a) && contains(c.determiners, i.det_b) &&
             contains(c.prepositions, i.prep) && object_in(c, i.object_a) &&
             object_in(c, i.object_b) && objects_distinct(i.object_a, i.object_b, c.rule) &&
             dp_feasible(i.det_a, i.prep, i.det_b);
    }
  };
  return std::visit(Visitor{cfg}, instr);
}

std::vector<Instruction> enumerate_instructions(const GrammarConfig& cfg) {
  cfg.validate();
  const auto dets = sorted_unique(cfg.determiners);
  const auto preps = sorted_unique(cfg.prepositions);
  const auto objs = objects(cfg);  // (color, shape) lexicographic
  std::vector<Instruction> out;

  switch (cfg.kind) {
    case EnvKind::D:
      for (Determiner d : dets)
        for (const auto& o : objs) out.emplace_back(DInstruction{d, o});
      break;
    case EnvKind::P:
      for (const auto& a : objs)
        for (Preposition p : preps)
          for (const auto& b : objs)
            if (objects_distinct(a, b, cfg.rule)) out.emplace_back(PInstruction{a, p, b});
      break;
    case EnvKind::DP:
      for (Determiner da : dets)
        for (const auto& a : objs)
          for (Preposition p : preps)
            for (Determiner db : dets)
              for (const auto& b : objs)
                if (objects_distinct(a, b, cfg.rule) && dp_feasible(da, p, db))
                  out.emplace_back(DPInstruction{da, a, p, db, b});
      break;
  }
  return out;
}

InstructionPool::InstructionPool(const GrammarConfig& cfg, SplitFilter filter,
                                 const SplitTables& tables) {
  for (auto& instr : enumerate_instructions(cfg))
    if (passes(filter, membership(instr, tables))) pool_.push_back(std::move(instr));
}

const Instruction& InstructionPool::sample(std::mt19937_64& rng) const {
  if (pool_.empty()) throw std::runtime_error("instruction pool is empty for this split/subset");
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  return pool_[pick(rng)];
}

Instruction sample_instruction(const GrammarConfig& cfg, SplitFilter filter,
                               const SplitTables& tables, std::mt19937_64& rng) {
  return InstructionPool(cfg, filter, tables).sample(rng);
}

Eigen::VectorXf EncodedInstruction::slot(int i) const {
  int offset = 0;
  for (int k = 0; k < i; ++k) offset += layout.slot_dims.at(k);
  return flat.segment(offset, layout.slot_dims.at(i));
}

std::vector<int> EncodedInstruction::hot_indices() const {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < flat.size(); ++i)
    if (flat[i] != 0.0f) out.push_back(static_cast<int>(i));
  return out;
}

EncodedInstruction encode(const Instruction& instr) {
  struct Visitor {
    std::vector<int> operator()(const DInstruction& i) const {
      return {id(i.det), id(i.obj.color), id(i.obj.shape)};
    }
    std::vector<int> operator()(const PInstruction& i) const {
      return {id(i.object_a.color), id(i.object_a.shape), id(i.prep), id(i.object_b.color),
              id(i.object_b.shape)};
    }
    std::vector<int> operator()(const DPInstruction& i) const {
      return {id(i.det_a), id(i.object_a.color), id(i.object_a.shape), id(i.prep),
              id(i.det_b), id(i.object_b.color), id(i.object_b.shape)};
    }
  };
  EncodedInstruction enc{vocab_sizes(kind_of(instr)), {}};
  enc.flat = Eigen::VectorXf::Zero(enc.layout.flat_size());
  const auto hot = std::visit(Visitor{}, instr);
  int offset = 0;
  for (int s = 0; s < enc.layout.slot_count(); ++s) {
    enc.flat[offset + hot[s]] = 1.0f;
    offset += enc.layout.slot_dims[s];
  }
  return enc;
}

CountRow count_report(EnvKind kind, DistinctnessRule rule, const SplitTables& tables) {
  GrammarConfig cfg;
  cfg.kind = kind;
  cfg.rule = rule;
  CountRow row{kind, rule};
  for (const auto& instr : enumerate_instructions(cfg)) {
    ++row.total;
    if (membership(instr, tables) == SplitLabel::Train)
      ++row.train;
    else
      ++row.test;
  }
  switch (kind) {
    case EnvKind::D:
      row.stated_total = 200, row.stated_train = 160, row.stated_test = 40;
      break;
    case EnvKind::P:
      row.stated_total = 6000, row.stated_train = 4800, row.stated_test = 1200;
      break;
    case EnvKind::DP:
      row.stated_total = 160000, row.stated_train = 120000, row.stated_test = 40000;
      break;
  }
  return row;
}

std::string format_count_table(const std::vector<CountRow>& rows) {
  std::string out = fmt::format("{:<4} {:<5} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}  {}\n", "env",
                                "rule", "total", "train", "test", "stated", "s.train", "s.test",
                                "flag");
  for (const auto& r : rows) {
    auto mark = [](std::int64_t a, std::int64_t b) { return a == b ? "" : "*"; };
    std::string flag = r.matches_stated()
                           ? "ok"
                           : fmt::format("MISMATCH{}{}{}", mark(r.total, r.stated_total),
                                         mark(r.train, r.stated_train), mark(r.test, r.stated_test));
    out += fmt::format("{:<4} {:<5} {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8}  {}\n", name(r.kind),
                       name(r.rule), r.total, r.train, r.test, r.stated_total, r.stated_train,
                       r.stated_test, flag);
  }
  return out;
}

std::string format_count_rows(const std::vector<CountRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += fmt::format(
        "count env={} rule={} total={} train={} test={} stated_total={} stated_train={} "
        "stated_test={} mismatch={}\n",
        name(r.kind), name(r.rule), r.total, r.train, r.test, r.stated_total, r.stated_train,
        r.stated_test, r.matches_stated() ? "no" : "yes");
  }
  return out;
}

}  // namespace groundworld
