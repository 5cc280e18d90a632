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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tracebench/bench.hpp"

namespace tracebench {

enum class Variation { Default, AltPrograms, Transduction };

std::string_view to_string(Variation v);
Variation variation_from_string(std::string_view text);  // "default", "alt-programs", "transduction"

// How demonstrations are chosen for each voter.
struct ShotStrategy {
  enum class Kind {
    PoolSample,     // k distinct pool entries per voter, kept in pool order
    FixedPermuted,  // one k-set per instance, order shuffled per voter
    Count,          // the first k pool entries, identical for every voter
  };
  Kind kind = Kind::PoolSample;
  int k = 4;

  static ShotStrategy pool_sample(int k) { return {Kind::PoolSample, k}; }
  static ShotStrategy fixed_permuted(int k) { return {Kind::FixedPermuted, k}; }
  static ShotStrategy count(int k) { return {Kind::Count, k}; }
};

std::string_view to_string(ShotStrategy::Kind kind);
ShotStrategy::Kind shot_kind_from_string(std::string_view text);  // "pool", "fixed", "count"

// Identifies one demonstration: an exemplar of some instance's pool.
struct ShotRef {
  std::string instance_id;
  int exemplar = 0;
  friend bool operator==(const ShotRef&, const ShotRef&) = default;
};

inline constexpr int kPromptTemplateVersion = 1;

// The answer anchor the closing instruction asks for.
inline constexpr std::string_view kAnswerAnchor = "```L2,";

// Appended after the chat template's assistant turn to skip the think phase.
inline constexpr std::string_view kNoThinkPrefix = "The execution trace is:\n";

struct PromptBundle {
  std::string instance_id;
  int voter = 0;
  Variation variation = Variation::Default;
  std::vector<ShotRef> shots;
  std::string prompt;
  std::string answer_prefix{kNoThinkPrefix};
  Trace gold;
};

class PromptError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// One rendered demonstration. `program` is only set for alt-programs shots.
struct ShotText {
  std::optional<std::string> program;
  std::string call;
  std::string trace;
};

// Fills the template. `program` is the listing shown before the
// demonstrations (omitted for transduction and alt-programs);
// `test_program` is shown right before the test input (alt-programs only).
std::string compose_prompt(const std::optional<std::string>& program,
                           std::span<const ShotText> shots,
                           const std::optional<std::string>& test_program,
                           std::string_view test_call);

// Pool indices chosen for `voter`. Randomness comes from
// derive_seed(seed, fnv1a64(id), voter); FixedPermuted's set itself only
// depends on (seed, id).
std::vector<int> select_shots(const TaskInstance& instance, const ShotStrategy& strategy,
                              int voter, std::uint64_t seed);

// Instances in the same bin as `instance`, excluding itself, in input order.
std::vector<const TaskInstance*> same_bin_siblings(const TaskInstance& instance,
                                                   std::span<const TaskInstance> all);

// Renders the prompt for one voter. alt-programs draws k distinct siblings
// (one random exemplar each) and throws PromptError if fewer than k are
// supplied; every variation throws PromptError if k exceeds the pool.
PromptBundle render_prompt(const TaskInstance& instance, const ShotStrategy& strategy,
                           Variation variation, int voter, std::uint64_t seed,
                           std::span<const TaskInstance* const> siblings = {});

// Tokenizer-free token estimate. Digits and punctuation count one token
// each, letter runs one token per four letters, whitespace runs are free
// except newlines, which count one each.
std::size_t estimate_tokens(std::string_view text);
inline std::size_t estimate_prompt_tokens(const PromptBundle& bundle) {
  return estimate_tokens(bundle.prompt);
}

}  // namespace tracebench
