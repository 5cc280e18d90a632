// Copyright 2026 The tracebench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tracebench/prompt.hpp"

#include <algorithm>
#include <cctype>

namespace tracebench {

std::string_view to_string(Variation v) {
  switch (v) {
    case Variation::Default: return "default";
    case Variation::AltPrograms: return "alt-programs";
    case Variation::Transduction: return "transduction";
  }
  return "default";
}

Variation variation_from_string(std::string_view text) {
  if (text == "default") return Variation::Default;
  if (text == "alt-programs") return Variation::AltPrograms;
  if (text == "transduction") return Variation::Transduction;
  throw std::invalid_argument("unknown variation '" + std::string(text) + "'");
}

std::string_view to_string(ShotStrategy::Kind kind) {
  switch (kind) {
    case ShotStrategy::Kind::PoolSample: return "pool";
    case ShotStrategy::Kind::FixedPermuted: return "fixed";
    case ShotStrategy::Kind::Count: return "count";
  }
  return "pool";
}

ShotStrategy::Kind shot_kind_from_string(std::string_view text) {
  if (text == "pool") return ShotStrategy::Kind::PoolSample;
  if (text == "fixed") return ShotStrategy::Kind::FixedPermuted;
  if (text == "count") return ShotStrategy::Kind::Count;
  throw std::invalid_argument("unknown shot strategy '" + std::string(text) + "'");
}

namespace {

constexpr std::string_view kInstruction =
    "Please execute the following program by outputting a trace of the program execution. "
    "The trace should include the line number, the variable name and the updated value of the "
    "variable after executing that line. Please follow the examples below:\n";

constexpr std::string_view kClosing =
    "Please follow the format above and provide the program execution trace starting with ";

void append_block(std::string& out, std::string_view label, std::string_view body) {
  out += '\n';
  out += label;
  out += ":\n```\n";
  out += body;
  out += "\n```\n";
}

}  // namespace

std::string compose_prompt(const std::optional<std::string>& program,
                           std::span<const ShotText> shots,
                           const std::optional<std::string>& test_program,
                           std::string_view test_call) {
  std::string out(kInstruction);
  if (program) append_block(out, "Program", *program);
  for (const auto& shot : shots) {
    if (shot.program) append_block(out, "Program", *shot.program);
    append_block(out, "Input", shot.call);
    append_block(out, "Output", shot.trace);
  }
  if (test_program) append_block(out, "Program", *test_program);
  append_block(out, "Input", test_call);
  out += '\n';
  out += kClosing;
  out += kAnswerAnchor;
  out += "\n\nOutput:";
  return out;
}

std::vector<int> select_shots(const TaskInstance& instance, const ShotStrategy& strategy,
                              int voter, std::uint64_t seed) {
  const auto pool = instance.pool.size();
  if (strategy.k < 0 || static_cast<std::size_t>(strategy.k) > pool) {
    throw PromptError("requested " + std::to_string(strategy.k) + " shots but instance " +
                      instance.id + " has a pool of " + std::to_string(pool));
  }
  const auto k = static_cast<std::size_t>(strategy.k);
  const auto id_hash = fnv1a64(instance.id);
  Rng voter_rng(derive_seed(seed, id_hash, static_cast<std::uint64_t>(voter)));
  std::vector<int> ids;
  auto take = [&](const std::vector<std::size_t>& picked) {
    for (auto i : picked) ids.push_back(static_cast<int>(i));
  };
  switch (strategy.kind) {
    case ShotStrategy::Kind::PoolSample:
      take(voter_rng.sample_indices(pool, k));
      break;
    case ShotStrategy::Kind::FixedPermuted: {
      Rng set_rng(derive_seed(seed, id_hash));
      take(set_rng.sample_indices(pool, k));
      voter_rng.shuffle(ids);
      break;
    }
    case ShotStrategy::Kind::Count:
      for (std::size_t i = 0; i < k; ++i) ids.push_back(static_cast<int>(i));
      break;
  }
  return ids;
}

std::vector<const TaskInstance*> same_bin_siblings(const TaskInstance& instance,
                                                   std::span<const TaskInstance> all) {
  std::vector<const TaskInstance*> out;
  for (const auto& other : all) {
    if (other.bin == instance.bin && other.id != instance.id) out.push_back(&other);
  }
  return out;
}

PromptBundle render_prompt(const TaskInstance& instance, const ShotStrategy& strategy,
                           Variation variation, int voter, std::uint64_t seed,
                           std::span<const TaskInstance* const> siblings) {
  PromptBundle bundle;
  bundle.instance_id = instance.id;
  bundle.voter = voter;
  bundle.variation = variation;
  bundle.gold = instance.test.trace;

  std::vector<ShotText> shots;
  const std::string listing = render_program(instance.program);
  if (variation == Variation::AltPrograms) {
    if (strategy.k < 0 || static_cast<std::size_t>(strategy.k) > siblings.size()) {
      throw PromptError("alt-programs needs " + std::to_string(strategy.k) +
                        " sibling instances for " + instance.id + ", got " +
                        std::to_string(siblings.size()));
    }
    Rng rng(derive_seed(seed, fnv1a64(instance.id), static_cast<std::uint64_t>(voter)));
    for (auto s : rng.sample_indices(siblings.size(), static_cast<std::size_t>(strategy.k))) {
      const TaskInstance& sib = *siblings[s];
      if (sib.pool.empty()) throw PromptError("sibling " + sib.id + " has an empty pool");
      const auto e = rng.index(sib.pool.size());
      bundle.shots.push_back({sib.id, static_cast<int>(e)});
      shots.push_back({render_program(sib.program), sib.pool[e].call_text,
                       trace_to_text(sib.pool[e].trace)});
    }
    bundle.prompt = compose_prompt(std::nullopt, shots, listing, instance.test.call_text);
    return bundle;
  }

  for (int e : select_shots(instance, strategy, voter, seed)) {
    bundle.shots.push_back({instance.id, e});
    const auto& ex = instance.pool[static_cast<std::size_t>(e)];
    shots.push_back({std::nullopt, ex.call_text, trace_to_text(ex.trace)});
  }
  const std::optional<std::string> program =
      variation == Variation::Transduction ? std::nullopt : std::optional<std::string>(listing);
  bundle.prompt = compose_prompt(program, shots, std::nullopt, instance.test.call_text);
  return bundle;
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t tokens = 0;
  std::size_t letters = 0;
  auto flush = [&] {
    tokens += (letters + 3) / 4;
    letters = 0;
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c) || c == '_') {
      ++letters;
      continue;
    }
    flush();
    if (c == '\n') {
      ++tokens;
    } else if (!std::isspace(c)) {
      ++tokens;
    }
  }
  flush();
  return tokens;
}

}  // namespace tracebench
