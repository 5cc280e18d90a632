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

#include <map>

#include "test_support.hpp"
#include "tracebench/generator.hpp"
#include "tracebench/trace.hpp"

using namespace tracebench;
using tracebench::testing::data_dir;
using tracebench::testing::read_lines;
using tracebench::testing::read_trimmed;

namespace {

Program reference() { return parse_program(read_lines(data_dir() / "reference_program.txt")); }

Trace run_ok(const Program& p, const std::vector<Value>& args,
             std::size_t limit = kDefaultStepLimit) {
  auto result = execute(p, args, limit);
  REQUIRE(std::holds_alternative<Trace>(result));
  return std::get<Trace>(result);
}

ExecError run_err(const Program& p, const std::vector<Value>& args,
                  std::size_t limit = kDefaultStepLimit) {
  auto result = execute(p, args, limit);
  REQUIRE(std::holds_alternative<ExecError>(result));
  return std::get<ExecError>(result);
}

// Collects (header line, increment, bound) for every counted loop.
void loops(const Block& body, std::vector<const While*>& out) {
  for (const auto& s : body) {
    if (const auto* w = std::get_if<While>(&s.node)) {
      out.push_back(w);
      loops(w->body, out);
    }
    if (const auto* i = std::get_if<If>(&s.node)) loops(i->body, out);
  }
}

const Stmt* find_line(const Block& body, int line) {
  for (const auto& s : body) {
    if (s.line == line) return &s;
    const Block* inner = nullptr;
    if (const auto* i = std::get_if<If>(&s.node)) inner = &i->body;
    if (const auto* w = std::get_if<While>(&s.node)) inner = &w->body;
    if (inner) {
      if (const Stmt* hit = find_line(*inner, line)) return hit;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("reference program first input reproduces the 16-step trace") {
  const Program p = reference();
  const auto args = parse_call(read_trimmed(data_dir() / "reference_call1.txt"), p.params());
  const Trace t = run_ok(p, args);
  CHECK(t.size() == 16);
  CHECK(trace_to_text(t) == read_trimmed(data_dir() / "reference_trace1.txt"));
}

TEST_CASE("reference program second input reproduces the 12-step trace") {
  const Program p = reference();
  const auto args = parse_call(read_trimmed(data_dir() / "reference_call2.txt"), p.params());
  const Trace t = run_ok(p, args);
  CHECK(t.size() == 12);
  CHECK(trace_to_text(t) == read_trimmed(data_dir() / "reference_trace2.txt"));
}

TEST_CASE("execution errors carry the offending line") {
  const Program pop = parse_program(std::vector<std::string>{
      "L1 def function(lst_x):", "L2     lst_x.pop()", "L3     return"});
  const ExecError e = run_err(pop, {Value::list({})});
  CHECK(e.kind == ExecErrorKind::PopEmpty);
  CHECK(e.line == 2);

  const Program index = parse_program(std::vector<std::string>{
      "L1 def function(lst_x):", "L2     a = lst_x[3]", "L3     return"});
  CHECK(run_err(index, {Value::list({1, 2, 3})}).kind == ExecErrorKind::IndexOutOfRange);
  CHECK(run_ok(index, {Value::list({1, 2, 3, 4})}).steps[0] ==
        TraceStep{2, Update{"a", Value::integer(4)}});

  const Program undefined = parse_program(std::vector<std::string>{
      "L1 def function(x):", "L2     y = z + 1", "L3     return"});
  const ExecError u = run_err(undefined, {Value::integer(1)});
  CHECK(u.kind == ExecErrorKind::UndefinedVariable);
  CHECK(u.line == 2);

  const Program forever = parse_program(std::vector<std::string>{
      "L1 def function(x):", "L2     while True:", "L3         x = x + 1", "L4     return"});
  const ExecError s = run_err(forever, {Value::integer(0)}, 50);
  CHECK(s.kind == ExecErrorKind::StepLimitExceeded);

  CHECK_THROWS_AS(execute(pop, std::vector<Value>{}), std::invalid_argument);
  CHECK_THROWS_AS(execute(pop, std::vector<Value>{Value::integer(1)}), std::invalid_argument);
}

TEST_CASE("counted loop emits every header evaluation including the failing one") {
  const Program p = parse_program(std::vector<std::string>{
      "L1 def function(x):", "L2     cnter = 0", "L3     cond_a = cnter != 4",
      "L4     while cond_a:", "L5         x = x + 1", "L6         cnter = cnter + 2",
      "L7         cond_a = cnter != 4", "L8     return"});
  const Trace t = run_ok(p, {Value::integer(0)});
  const std::string expected =
      "L2,cnter:0\nL3,cond_a:True\nL4,\nL5,x:1\nL6,cnter:2\nL7,cond_a:True\nL4,\nL5,x:2\n"
      "L6,cnter:4\nL7,cond_a:False\nL4,\nL8,";
  CHECK(trace_to_text(t) == expected);
}

TEST_CASE("assignments emit even when the value is unchanged; untaken branches emit nothing") {
  const Program p = parse_program(std::vector<std::string>{
      "L1 def function(cond_a):", "L2     cond_a = 1 == 2", "L3     if cond_a:",
      "L4         x = 1", "L5     return"});
  CHECK(trace_to_text(run_ok(p, {Value::boolean(false)})) == "L2,cond_a:False\nL3,\nL5,");
}

TEST_CASE("trace text format") {
  CHECK(render_step(TraceStep{2, std::nullopt}) == "L2,");
  const auto step = parse_step("L15,i:12");
  REQUIRE(step);
  CHECK(*step == TraceStep{15, Update{"i", Value::integer(12)}});
  CHECK(parse_step("L4,lst_x:[9,3,9,9,7]")->update->value == Value::list({9, 3, 9, 9, 7}));
  CHECK(parse_step("L6,cond_y:False")->update->value == Value::boolean(false));
  CHECK(parse_step("L6,x:-3")->update->value == Value::integer(-3));
  for (const char* bad : {"", "L", "L2", "2,", "L0,", "Lx,", "L2,x", "L2,x:", "L2,x:[1, 2]",
                          "L2,x:true", " L2,", "L2, ", "L2,1x:3"}) {
    CHECK_MESSAGE(!parse_step(bad), bad);
  }

  const std::string gold = read_trimmed(data_dir() / "reference_trace1.txt");
  CHECK(trace_to_text(text_to_trace(gold)) == gold);
  try {
    text_to_trace("L2,\nL4,x:1\nnonsense");
    FAIL("expected TraceParseError");
  } catch (const TraceParseError& e) {
    CHECK(e.line_index() == 2);
  }
}

TEST_CASE("trace round-trip over generated traces") {
  GenConfig cfg;
  Rng rng(77);
  int checked = 0;
  while (checked < 300) {
    const Program p = generate_program(cfg, rng);
    auto result = execute(p, sample_inputs(p, cfg, rng));
    if (const auto* t = std::get_if<Trace>(&result)) {
      CHECK(text_to_trace(trace_to_text(*t)) == *t);
      CHECK(lines_to_trace(trace_lines(*t)) == *t);
      ++checked;
    }
  }
}

TEST_CASE("interpreter invariants over generated programs") {
  GenConfig cfg;
  Rng rng(4242);
  int accepted = 0;
  for (int i = 0; i < 2000; ++i) {
    const Program p = generate_program(cfg, rng);
    const auto args = sample_inputs(p, cfg, rng);
    auto result = execute(p, args);
    if (!std::holds_alternative<Trace>(result)) {
      CHECK(std::get<ExecError>(result).kind != ExecErrorKind::UndefinedVariable);
      CHECK(std::get<ExecError>(result).kind != ExecErrorKind::StepLimitExceeded);
      continue;
    }
    ++accepted;
    const Trace& t = std::get<Trace>(result);
    REQUIRE(!t.steps.empty());
    CHECK(t.steps.front().line == 2);
    CHECK(t.steps.back().line == p.loc());
    CHECK(!t.steps.back().update);
    CHECK(execute(p, args) == result);

    // At scope depth 1 every loop sits at top level and runs exactly once, so
    // its header appears bound/increment + 1 times.
    std::vector<const While*> ws;
    loops(p.body(), ws);
    for (const While* w : ws) {
      auto hits = std::count_if(t.steps.begin(), t.steps.end(),
                                [&](const TraceStep& s) { return s.line == w->lines.header; });
      CHECK(hits == w->bound / w->increment + 1);
    }

    // Replay list mutations against an independently tracked state.
    std::map<std::string, IntList> lists;
    std::map<std::string, Int> ints;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (args[k].is_list()) lists[p.params()[k].name] = args[k].as_list();
    }
    for (const auto& step : t.steps) {
      if (!step.update) continue;
      const Value& v = step.update->value;
      if (v.is_int()) ints[step.update->name] = v.as_int();
      if (!v.is_list()) continue;
      const Stmt* s = find_line(p.body(), step.line);
      REQUIRE(s != nullptr);
      IntList& live = lists[step.update->name];
      if (std::holds_alternative<Pop>(s->node)) {
        REQUIRE(!live.empty());
        live.pop_back();
      } else {
        const auto& app = std::get<Append>(s->node);
        if (const auto* lit = std::get_if<Literal>(&app.item)) {
          live.push_back(lit->value);
        } else {
          const std::string& name = std::get<VarRef>(app.item).name;
          if (!ints.count(name)) {
            for (std::size_t k = 0; k < args.size(); ++k) {
              if (p.params()[k].name == name) ints[name] = args[k].as_int();
            }
          }
          live.push_back(ints.at(name));
        }
      }
      CHECK(v.as_list() == live);
    }
  }
  CHECK(accepted > 500);
}
