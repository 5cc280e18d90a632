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

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tracebench/program.hpp"
#include "tracebench/value.hpp"

namespace tracebench {

struct Update {
  std::string name;
  Value value;
  friend bool operator==(const Update&, const Update&) = default;
};

// One trace line: `L{n},` or `L{n},{name}:{compact value}`.
struct TraceStep {
  int line = 0;
  std::optional<Update> update;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Trace {
  std::vector<TraceStep> steps;
  std::size_t size() const { return steps.size(); }
  friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line_index, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line_index + 1) + ": " + what),
        line_index_(line_index) {}
  std::size_t line_index() const { return line_index_; }

 private:
  std::size_t line_index_;
};

std::string render_step(const TraceStep& step);
std::optional<TraceStep> parse_step(std::string_view text);

std::vector<std::string> trace_lines(const Trace& trace);
std::string trace_to_text(const Trace& trace);
Trace text_to_trace(std::string_view text);
Trace lines_to_trace(std::span<const std::string> lines);

enum class ExecErrorKind { PopEmpty, IndexOutOfRange, StepLimitExceeded, UndefinedVariable };

std::string_view to_string(ExecErrorKind kind);

struct ExecError {
  ExecErrorKind kind = ExecErrorKind::UndefinedVariable;
  int line = 0;
  std::string detail;
  friend bool operator==(const ExecError&, const ExecError&) = default;
};

using ExecResult = std::variant<Trace, ExecError>;

inline constexpr std::size_t kDefaultStepLimit = 10'000;

// Runs `program` on `args` and records one step per executed line. Bare steps
// for `if`/`while` headers (every evaluation, including the final failing
// one) and `return`; name + new value for assignments and list mutations.
// Throws std::invalid_argument when args do not match the parameter list.
ExecResult execute(const Program& program, std::span<const Value> args,
                   std::size_t step_limit = kDefaultStepLimit);

}  // namespace tracebench
