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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "test_support.hpp"
#include "tracebench/prompt.hpp"

using namespace tracebench;
using tracebench::testing::data_dir;
using tracebench::testing::read_text;

namespace {

std::filesystem::path golden_dir() { return data_dir().parent_path() / "golden"; }

const Dataset& reference() {
  static const Dataset ds = load_dataset(data_dir() / "reference_dataset.jsonl");
  return ds;
}

const std::vector<TaskInstance>& small_set() {
  static const std::vector<TaskInstance> set = [] {
    SplitConfig cfg;
    cfg.gen.seed = 77;
    for (auto& b : cfg.bins) b.target_count = 3;
    return build_split(cfg);
  }();
  return set;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("reference one-shot prompt matches the golden file") {
  const auto& inst = reference().instances.at(0);
  REQUIRE(inst.pool.size() == 1);
  const auto bundle = render_prompt(inst, ShotStrategy::pool_sample(1), Variation::Default, 0, 0);
  CHECK(bundle.prompt == read_text(golden_dir() / "reference_prompt.txt"));
  CHECK(bundle.shots == std::vector<ShotRef>{{"reference", 0}});
  CHECK(bundle.gold == inst.test.trace);
  CHECK(bundle.instance_id == "reference");
  CHECK(bundle.answer_prefix == "The execution trace is:\n");
}

TEST_CASE("transduction drops exactly the program block") {
  const auto& inst = reference().instances.at(0);
  const auto golden = read_text(golden_dir() / "reference_prompt.txt");
  const std::string block = "\nProgram:\n```\n" + render_program(inst.program) + "\n```\n";
  const auto at = golden.find(block);
  REQUIRE(at != std::string::npos);
  const auto expected = golden.substr(0, at) + golden.substr(at + block.size());
  const auto bundle =
      render_prompt(inst, ShotStrategy::pool_sample(1), Variation::Transduction, 0, 0);
  CHECK(bundle.prompt == expected);
  CHECK(bundle.prompt.find("def function") == std::string::npos);
}

TEST_CASE("default prompt shows the test program and input once, after the shots") {
  for (const auto& inst : small_set()) {
    const auto b = render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 3, 9);
    const auto listing = render_program(inst.program);
    CHECK(count_of(b.prompt, listing) == 1);
    CHECK(count_of(b.prompt, inst.test.call_text) == 1);
    CHECK(count_of(b.prompt, "\nInput:\n") == 5);
    CHECK(count_of(b.prompt, "\nOutput:\n```\n") == 4);
    const auto test_at = b.prompt.find(inst.test.call_text);
    for (const auto& s : b.shots) {
      const auto& call = inst.pool[static_cast<std::size_t>(s.exemplar)].call_text;
      CHECK(b.prompt.find(call) < test_at);
    }
    CHECK(b.prompt.size() >= 7);
    CHECK(b.prompt.substr(b.prompt.size() - 7) == "Output:");
    CHECK(b.prompt.find("starting with ```L2,\n\nOutput:") != std::string::npos);
  }
}

TEST_CASE("pool sampling draws distinct shots per voter in pool order") {
  const auto& inst = small_set().front();
  REQUIRE(inst.pool.size() == 64);
  std::set<std::vector<int>> seen;
  for (int voter = 0; voter < 31; ++voter) {
    const auto ids = select_shots(inst, ShotStrategy::pool_sample(4), voter, 123);
    REQUIRE(ids.size() == 4);
    CHECK(std::is_sorted(ids.begin(), ids.end()));
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    for (int id : ids) CHECK((id >= 0 && id < 64));
    seen.insert(ids);
  }
  CHECK(seen.size() > 1);
}

TEST_CASE("fixed permuted keeps one shot set and permutes it per voter") {
  const auto& inst = small_set().front();
  const auto base = select_shots(inst, ShotStrategy::fixed_permuted(8), 0, 5);
  auto sorted_base = base;
  std::sort(sorted_base.begin(), sorted_base.end());
  std::set<std::vector<int>> orders;
  for (int voter = 0; voter < 31; ++voter) {
    auto ids = select_shots(inst, ShotStrategy::fixed_permuted(8), voter, 5);
    orders.insert(ids);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == sorted_base);
  }
  CHECK(orders.size() > 1);
}

TEST_CASE("count strategy takes the leading pool entries") {
  const auto& inst = small_set().front();
  for (int voter = 0; voter < 5; ++voter) {
    CHECK(select_shots(inst, ShotStrategy::count(3), voter, 1) == std::vector<int>{0, 1, 2});
  }
  CHECK(select_shots(inst, ShotStrategy::count(64), 0, 1).size() == 64);
  CHECK_THROWS_AS(select_shots(inst, ShotStrategy::count(65), 0, 1), PromptError);
  CHECK_THROWS_AS(render_prompt(reference().instances.at(0), ShotStrategy::pool_sample(2),
                                Variation::Default, 0, 0),
                  PromptError);
}

TEST_CASE("rendering is deterministic per (instance, voter, seed)") {
  const auto& inst = small_set()[5];
  const auto a = render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 7, 11);
  const auto b = render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 7, 11);
  CHECK(a.prompt == b.prompt);
  CHECK(a.shots == b.shots);
  const auto c = render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 8, 11);
  const auto d = render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 7, 12);
  CHECK((c.shots != a.shots || d.shots != a.shots));
}

TEST_CASE("alt-programs uses same-bin siblings with their own programs") {
  const auto& all = small_set();
  const auto& inst = all.front();
  const auto siblings = same_bin_siblings(inst, all);
  REQUIRE(siblings.size() == 2);
  for (auto* s : siblings) {
    CHECK(s->bin == inst.bin);
    CHECK(s->id != inst.id);
  }
  const auto b =
      render_prompt(inst, ShotStrategy::pool_sample(2), Variation::AltPrograms, 0, 3, siblings);
  REQUIRE(b.shots.size() == 2);
  CHECK(b.shots[0].instance_id != b.shots[1].instance_id);
  for (const auto& shot : b.shots) {
    CHECK(shot.instance_id != inst.id);
    const auto* sib = *std::find_if(siblings.begin(), siblings.end(),
                                    [&](auto* s) { return s->id == shot.instance_id; });
    const auto& ex = sib->pool.at(static_cast<std::size_t>(shot.exemplar));
    CHECK(b.prompt.find(render_program(sib->program)) != std::string::npos);
    CHECK(b.prompt.find(trace_to_text(ex.trace)) != std::string::npos);
  }
  // The test program comes last, directly before the test input.
  const std::string tail = "\nProgram:\n```\n" + render_program(inst.program) +
                           "\n```\n\nInput:\n```\n" + inst.test.call_text + "\n```\n";
  CHECK(b.prompt.find(tail) != std::string::npos);
  CHECK(count_of(b.prompt, "\nProgram:\n") == 3);

  CHECK_THROWS_AS(
      render_prompt(inst, ShotStrategy::pool_sample(3), Variation::AltPrograms, 0, 3, siblings),
      PromptError);
}

TEST_CASE("variation and strategy names round-trip") {
  for (auto v : {Variation::Default, Variation::AltPrograms, Variation::Transduction}) {
    CHECK(variation_from_string(to_string(v)) == v);
  }
  for (auto k : {ShotStrategy::Kind::PoolSample, ShotStrategy::Kind::FixedPermuted,
                 ShotStrategy::Kind::Count}) {
    CHECK(shot_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS(variation_from_string("other"));
  CHECK_THROWS(shot_kind_from_string("other"));
}

TEST_CASE("token estimate basics") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("   ") == 0);
  CHECK(estimate_tokens("L12,lst_x:[1,2]") == 12);
  CHECK(estimate_tokens("abcd") == 1);
  CHECK(estimate_tokens("abcde") == 2);
  CHECK(estimate_tokens("a\nb") == 3);
  const auto& inst = small_set()[4];
  const auto k4 = render_prompt(inst, ShotStrategy::count(4), Variation::Default, 0, 0);
  const auto k8 = render_prompt(inst, ShotStrategy::count(8), Variation::Default, 0, 0);
  CHECK(estimate_prompt_tokens(k8) > estimate_prompt_tokens(k4));
}

TEST_CASE("4-shot medium prompts land near the reference input size") {
  SplitConfig cfg;
  cfg.gen.seed = 2024;
  cfg.bins = {default_bins()[1]};
  cfg.bins[0].target_count = 40;
  const auto set = build_split(cfg);
  double total = 0;
  for (const auto& inst : set) {
    total += static_cast<double>(estimate_prompt_tokens(
        render_prompt(inst, ShotStrategy::pool_sample(4), Variation::Default, 0, 1)));
  }
  const double mean = total / static_cast<double>(set.size());
  MESSAGE("mean 4-shot medium prompt tokens: " << mean);
  CHECK(std::abs(mean - 4100.0) <= 0.3 * 4100.0);
}
