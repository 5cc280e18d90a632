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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tracebench/ast.hpp"
#include "tracebench/value.hpp"

namespace tracebench {

struct Param {
  std::string name;
  ValueType type = ValueType::Int;
  friend bool operator==(const Param&, const Param&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line_index, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_index + 1) + ": " + what),
        line_index_(line_index) {}
  std::size_t line_index() const { return line_index_; }

 private:
  std::size_t line_index_;
};

// A generated mini-language function together with its numbered listing.
//
// Construction assigns line numbers: L1 is the signature and every statement
// (and every structural line of a counted loop) gets the next number in
// source order. `lines()` holds the rendered listing, one entry per line,
// each prefixed `L{n} ` and indented four spaces per block depth.
class Program {
 public:
  Program() = default;
  Program(std::vector<Param> params, Block body, std::string config_hash = {},
          std::uint64_t seed = 0);

  const std::vector<Param>& params() const { return params_; }
  const Block& body() const { return body_; }
  const std::vector<std::string>& lines() const { return lines_; }
  int loc() const { return static_cast<int>(lines_.size()); }
  const std::string& config_hash() const { return config_hash_; }
  std::uint64_t seed() const { return seed_; }

  friend bool operator==(const Program&, const Program&) = default;

 private:
  std::vector<Param> params_;
  Block body_;
  std::vector<std::string> lines_;
  std::string config_hash_;
  std::uint64_t seed_ = 0;
};

// Newline-joined listing (no trailing newline).
std::string render_program(const Program& program);

// `function(name1=v1, name2=v2)` with spaced value rendering. Throws
// std::invalid_argument on arity mismatch.
std::string render_call(std::span<const Param> params, std::span<const Value> args);

// Inverse of render_program over the supported subset. Accepts the listing
// as lines; line numbers must run 1..n. Throws ParseError.
Program parse_program(std::span<const std::string> lines, std::string config_hash = {},
                      std::uint64_t seed = 0);

// Inverse of render_call; argument names must match `params` in order.
std::vector<Value> parse_call(std::string_view text, std::span<const Param> params);

// Maps every statement to its source line, in execution-independent source
// order. Counted loops contribute all five structural lines.
std::vector<int> statement_lines(const Program& program);

// Longest nesting depth of If/While blocks (0 for a flat body).
int nesting_depth(const Block& body);

}  // namespace tracebench
