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
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tracebench/program.hpp"
#include "tracebench/rng.hpp"

namespace tracebench {

enum class StmtKind { Assignment, IfBlock, WhileBlock, ListOp };

std::string_view to_string(StmtKind kind);
StmtKind stmt_kind_from_string(std::string_view text);

enum class ListSizeRegime { Short, Medium, Long };

std::pair<int, int> list_len_range_for(ListSizeRegime regime);

struct GenConfig {
  std::uint64_t seed = 0;
  int max_loc = 50;
  int max_scope_depth = 1;
  int max_expansion_depth = 200;
  Int int_cap = 10;     // input integers are drawn from [0, int_cap]
  Int literal_cap = 9;  // literals in the program text are drawn from [0, literal_cap]
  Int element_cap = 9;  // input list elements are drawn from [0, element_cap]
  std::pair<int, int> list_len_range{5, 10};
  Int while_bound_cap = 100;
  std::vector<Int> while_increments{1, 2, 3};
  std::vector<StmtKind> allowed_stmt_kinds{StmtKind::Assignment, StmtKind::IfBlock,
                                           StmtKind::WhileBlock, StmtKind::ListOp};
  bool allow_var_index = false;
  bool allow_var_var_operands = false;
  bool allow_while_true = false;

  // Statement-list lengths are geometric with these means, truncated by max_loc.
  double mean_stmts = 12.0;
  double mean_block_stmts = 3.0;
  // Chance an assignment introduces a new variable instead of reusing one.
  double fresh_var_prob = 0.5;

  std::pair<int, int> int_params{1, 3};
  std::pair<int, int> list_params{1, 3};
  std::pair<int, int> bool_params{1, 2};

  std::vector<std::string> int_names = default_names("");
  std::vector<std::string> list_names = default_names("lst_");
  std::vector<std::string> bool_names = default_names("cond_");
  std::string counter_name = "cnter";

  int max_program_retries = 64;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;

  static std::vector<std::string> default_names(const std::string& prefix);
  void apply_regime(ListSizeRegime regime) { list_len_range = list_len_range_for(regime); }
  OperandRules operand_rules() const { return {allow_var_var_operands, allow_var_index}; }

  // Throws std::invalid_argument describing the first bad field.
  void validate() const;
};

class GenerationExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Expands the production rules under `cfg`. The result always ends in
// `return`, fits in max_loc lines and respects the scope-depth limit; counted
// loops use bound = increment * iterations so they provably terminate.
// Attempts that exceed max_expansion_depth are regenerated up to
// max_program_retries times before GenerationExhausted is thrown.
Program generate_program(const GenConfig& cfg, Rng& rng);

// Ints in [0, int_cap], list lengths in list_len_range with elements in
// [0, element_cap], bools uniform.
std::vector<Value> sample_inputs(const Program& program, const GenConfig& cfg, Rng& rng);

// Stable hash of every field except the seed.
std::string config_hash(const GenConfig& cfg);

}  // namespace tracebench
