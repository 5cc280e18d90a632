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

#include "tracebench/generator.hpp"

#include <algorithm>

#include "tracebench/config.hpp"

namespace tracebench {

std::string_view to_string(StmtKind kind) {
  switch (kind) {
    case StmtKind::Assignment:
      return "assignment";
    case StmtKind::IfBlock:
      return "if_block";
    case StmtKind::WhileBlock:
      return "while_block";
    case StmtKind::ListOp:
      return "list_op";
  }
  return "assignment";
}

StmtKind stmt_kind_from_string(std::string_view text) {
  for (auto kind : {StmtKind::Assignment, StmtKind::IfBlock, StmtKind::WhileBlock,
                    StmtKind::ListOp}) {
    if (text == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown statement kind '" + std::string(text) + "'");
}

std::pair<int, int> list_len_range_for(ListSizeRegime regime) {
  switch (regime) {
    case ListSizeRegime::Short:
      return {5, 10};
    case ListSizeRegime::Medium:
      return {25, 30};
    case ListSizeRegime::Long:
      return {50, 55};
  }
  return {5, 10};
}

std::vector<std::string> GenConfig::default_names(const std::string& prefix) {
  std::vector<std::string> names;
  for (char c = 'a'; c <= 'z'; ++c) names.push_back(prefix + c);
  return names;
}

void GenConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("GenConfig: " + what); };
  if (max_loc < 3) bad("max_loc must be at least 3");
  if (max_scope_depth < 0) bad("max_scope_depth must be non-negative");
  if (max_expansion_depth < 1) bad("max_expansion_depth must be positive");
  if (int_cap < 0 || literal_cap < 0 || element_cap < 0) bad("caps must be non-negative");
  if (list_len_range.first < 0 || list_len_range.second < list_len_range.first) {
    bad("list_len_range must be a non-empty range of lengths");
  }
  if (while_increments.empty()) bad("while_increments must not be empty");
  for (Int inc : while_increments) {
    if (inc < 1 || inc > while_bound_cap) bad("while increments must lie in [1, while_bound_cap]");
  }
  if (allowed_stmt_kinds.empty()) bad("allowed_stmt_kinds must not be empty");
  if (mean_stmts < 1.0 || mean_block_stmts < 1.0) bad("statement means must be >= 1");
  if (fresh_var_prob < 0.0 || fresh_var_prob > 1.0) bad("fresh_var_prob must be in [0, 1]");
  for (auto [lo, hi] : {int_params, list_params, bool_params}) {
    if (lo < 0 || hi < lo) bad("parameter count ranges must be non-empty");
  }
  if (static_cast<std::size_t>(int_params.second) > int_names.size() ||
      static_cast<std::size_t>(list_params.second) > list_names.size() ||
      static_cast<std::size_t>(bool_params.second) > bool_names.size()) {
    bad("name pools are smaller than the parameter counts");
  }
  for (const auto& n : int_names) {
    if (type_of_name(n) != ValueType::Int) bad("int name '" + n + "' has a typed prefix");
  }
  for (const auto& n : list_names) {
    if (type_of_name(n) != ValueType::IntList) bad("list names must start with lst_");
  }
  for (const auto& n : bool_names) {
    if (type_of_name(n) != ValueType::Bool) bad("bool names must start with cond_");
  }
  if (type_of_name(counter_name) != ValueType::Int) bad("counter_name must be an int name");
  if (max_program_retries < 1) bad("max_program_retries must be positive");
}

namespace {

struct DepthExceeded {};

bool contains(const std::vector<std::string>& names, const std::string& name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

void add_live(std::vector<std::string>& names, const std::string& name) {
  if (!contains(names, name)) names.push_back(name);
}

// Variables that are bound on every path reaching the current point.
struct Scope {
  std::vector<std::string> ints;
  std::vector<std::string> lists;
  std::vector<std::string> bools;
  std::vector<std::string> frozen;  // counters and conditions of enclosing loops
};

class ProgramGenerator {
 public:
  ProgramGenerator(const GenConfig& cfg, Rng& rng) : cfg_(cfg), rng_(rng) {}

  Program build(std::string hash, std::uint64_t seed) {
    Scope scope;
    std::vector<Param> params;
    draw_params(params, scope);
    // Signature and the final return take one line each.
    budget_ = cfg_.max_loc - 2;
    Block body = stmt_list(scope, 0, 1, cfg_.mean_stmts, false);
    note_depth(static_cast<int>(body.size()) + 2);
    body.push_back(Stmt{Return{}, 0});
    return Program(std::move(params), std::move(body), std::move(hash), seed);
  }

 private:
  void draw_params(std::vector<Param>& params, Scope& scope) {
    auto draw = [&](const std::vector<std::string>& pool, std::pair<int, int> range,
                    ValueType type, std::vector<std::string>& live) {
      auto count = static_cast<std::size_t>(rng_.uniform(range.first, range.second));
      for (std::size_t i : sample_shuffled(pool.size(), count)) {
        params.push_back(Param{pool[i], type});
        live.push_back(pool[i]);
      }
    };
    draw(cfg_.int_names, cfg_.int_params, ValueType::Int, scope.ints);
    draw(cfg_.list_names, cfg_.list_params, ValueType::IntList, scope.lists);
    draw(cfg_.bool_names, cfg_.bool_params, ValueType::Bool, scope.bools);
  }

  std::vector<std::size_t> sample_shuffled(std::size_t n, std::size_t k) {
    auto picked = rng_.sample_indices(n, k);
    rng_.shuffle(picked);
    return picked;
  }

  void note_depth(int depth) {
    if (depth > cfg_.max_expansion_depth) throw DepthExceeded{};
  }

  // Fewest lines a statement of `kind` can occupy.
  static int min_lines(StmtKind kind) {
    switch (kind) {
      case StmtKind::IfBlock:
        return 2;
      case StmtKind::WhileBlock:
        return 6;
      default:
        return 1;
    }
  }

  std::vector<StmtKind> candidates(const Scope& scope, int block_depth) const {
    std::vector<StmtKind> out;
    for (StmtKind kind : cfg_.allowed_stmt_kinds) {
      bool is_block = kind == StmtKind::IfBlock || kind == StmtKind::WhileBlock;
      if (is_block && block_depth >= cfg_.max_scope_depth) continue;
      if (kind == StmtKind::IfBlock && scope.bools.empty()) continue;
      if (kind == StmtKind::ListOp && scope.lists.empty()) continue;
      if (min_lines(kind) > budget_) continue;
      out.push_back(kind);
    }
    return out;
  }

  Block stmt_list(Scope& scope, int block_depth, int derivation_depth, double mean,
                  bool nonempty) {
    Block out;
    const double keep_going = 1.0 - 1.0 / mean;
    while (true) {
      auto kinds = candidates(scope, block_depth);
      if (kinds.empty()) {
        // Block bodies need at least one statement; plain assignments are the
        // fallback when the allowed kinds cannot appear at this depth.
        if (!(nonempty && out.empty() && budget_ >= 1)) break;
        kinds.push_back(StmtKind::Assignment);
      }
      const int depth = derivation_depth + static_cast<int>(out.size()) + 1;
      note_depth(depth);
      out.push_back(statement(rng_.pick(kinds), scope, block_depth, depth));
      if (!rng_.bernoulli(keep_going)) break;
    }
    return out;
  }

  Stmt statement(StmtKind kind, Scope& scope, int block_depth, int depth) {
    switch (kind) {
      case StmtKind::Assignment:
        --budget_;
        return assignment(scope, depth + 1);
      case StmtKind::ListOp:
        --budget_;
        note_depth(depth + 3);
        return list_op(scope);
      case StmtKind::IfBlock:
        return if_block(scope, block_depth, depth + 1);
      case StmtKind::WhileBlock:
        return cfg_.allow_while_true && rng_.bernoulli(0.5)
                   ? while_true(scope, block_depth, depth + 1)
                   : while_block(scope, block_depth, depth + 1);
    }
    return Stmt{Return{}, 0};
  }

  Operand operand(const Scope& scope, bool allow_var) {
    if (allow_var && !scope.ints.empty() && rng_.bernoulli(0.5)) {
      return VarRef{rng_.pick(scope.ints)};
    }
    return Literal{rng_.uniform(0, cfg_.literal_cap)};
  }

  std::pair<Operand, Operand> operand_pair(const Scope& scope) {
    if (cfg_.allow_var_var_operands) return {operand(scope, true), operand(scope, true)};
    // lit-lit, lit-var or var-lit
    int shape = scope.ints.empty() ? 0 : static_cast<int>(rng_.uniform(0, 2));
    Operand lhs = shape == 2 ? Operand{VarRef{rng_.pick(scope.ints)}} : operand(scope, false);
    Operand rhs = shape == 1 ? Operand{VarRef{rng_.pick(scope.ints)}} : operand(scope, false);
    return {std::move(lhs), std::move(rhs)};
  }

  std::string target_name(const std::vector<std::string>& live,
                          const std::vector<std::string>& pool, const Scope& scope) {
    std::vector<std::string> reusable;
    for (const auto& n : live) {
      if (!contains(scope.frozen, n) && n != cfg_.counter_name) reusable.push_back(n);
    }
    std::vector<std::string> fresh;
    for (const auto& n : pool) {
      if (!contains(live, n) && !contains(scope.frozen, n)) fresh.push_back(n);
    }
    if (!fresh.empty() && (reusable.empty() || rng_.bernoulli(cfg_.fresh_var_prob))) {
      return rng_.pick(fresh);
    }
    if (reusable.empty()) return rng_.pick(pool);
    return rng_.pick(reusable);
  }

  Stmt assignment(Scope& scope, int depth) {
    const OperandRules rules = cfg_.operand_rules();
    if (rng_.bernoulli(0.5)) {
      note_depth(depth + 3);
      auto [lhs, rhs] = operand_pair(scope);
      CmpOp op = rng_.bernoulli(0.5) ? CmpOp::Eq : CmpOp::Ne;
      Cmp value = make_cmp(op, std::move(lhs), std::move(rhs), rules);
      std::string target = target_name(scope.bools, cfg_.bool_names, scope);
      add_live(scope.bools, target);
      return Stmt{BoolAssign{std::move(target), std::move(value)}, 0};
    }

    note_depth(depth + 4);
    Expr value;
    switch (rng_.uniform(0, 2)) {
      case 0: {
        Operand op = operand(scope, true);
        if (is_var(op)) {
          value = std::get<VarRef>(op);
        } else {
          value = std::get<Literal>(op);
        }
        break;
      }
      case 1: {
        auto [lhs, rhs] = operand_pair(scope);
        ArithOp op = rng_.bernoulli(0.5) ? ArithOp::Add : ArithOp::Sub;
        value = make_arith(op, std::move(lhs), std::move(rhs), rules);
        break;
      }
      default: {
        Operand subscript = operand(scope, cfg_.allow_var_index);
        value = make_index(rng_.pick(scope.lists), std::move(subscript), rules);
        break;
      }
    }
    std::string target = target_name(scope.ints, cfg_.int_names, scope);
    add_live(scope.ints, target);
    return Stmt{Assign{std::move(target), std::move(value)}, 0};
  }

  Stmt list_op(const Scope& scope) {
    std::string list = rng_.pick(scope.lists);
    if (rng_.bernoulli(0.5)) return Stmt{Pop{std::move(list)}, 0};
    return Stmt{Append{std::move(list), operand(scope, true)}, 0};
  }

  Stmt if_block(Scope& scope, int block_depth, int depth) {
    --budget_;
    std::string cond = rng_.pick(scope.bools);
    // Names first bound inside a conditional body are not live afterwards.
    Scope inner = scope;
    Block body = stmt_list(inner, block_depth + 1, depth + 1, cfg_.mean_block_stmts, true);
    return Stmt{If{std::move(cond), std::move(body)}, 0};
  }

  Stmt while_block(Scope& scope, int block_depth, int depth) {
    budget_ -= 5;
    note_depth(depth + 3);
    While loop;
    // Nested loops (only with max_scope_depth > 1) need their own counter.
    loop.counter = block_depth == 0 ? cfg_.counter_name
                                    : cfg_.counter_name + std::to_string(block_depth);
    loop.cond = target_name(scope.bools, cfg_.bool_names, scope);
    loop.increment = rng_.pick(cfg_.while_increments);
    loop.bound = loop.increment * rng_.uniform(1, cfg_.while_bound_cap / loop.increment);

    add_live(scope.ints, loop.counter);
    add_live(scope.bools, loop.cond);
    scope.frozen.push_back(loop.counter);
    scope.frozen.push_back(loop.cond);
    // The body runs at least once, so its bindings stay live after the loop.
    loop.body = stmt_list(scope, block_depth + 1, depth + 1, cfg_.mean_block_stmts, true);
    scope.frozen.resize(scope.frozen.size() - 2);
    return Stmt{std::move(loop), 0};
  }

  Stmt while_true(Scope& scope, int block_depth, int depth) {
    --budget_;
    Scope inner = scope;
    Block body = stmt_list(inner, block_depth + 1, depth + 1, cfg_.mean_block_stmts, true);
    return Stmt{WhileTrue{std::move(body)}, 0};
  }

  const GenConfig& cfg_;
  Rng& rng_;
  int budget_ = 0;
};

}  // namespace

Program generate_program(const GenConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  for (int attempt = 0; attempt < cfg.max_program_retries; ++attempt) {
    const std::uint64_t seed = rng.next();
    Rng local(seed);
    try {
      return ProgramGenerator(cfg, local).build(hash, seed);
    } catch (const DepthExceeded&) {
    }
  }
  throw GenerationExhausted("expansion depth " + std::to_string(cfg.max_expansion_depth) +
                            " exceeded in " + std::to_string(cfg.max_program_retries) +
                            " consecutive attempts");
}

std::vector<Value> sample_inputs(const Program& program, const GenConfig& cfg, Rng& rng) {
  std::vector<Value> args;
  args.reserve(program.params().size());
  for (const auto& param : program.params()) {
    switch (param.type) {
      case ValueType::Int:
        args.push_back(Value::integer(rng.uniform(0, cfg.int_cap)));
        break;
      case ValueType::Bool:
        args.push_back(Value::boolean(rng.bernoulli(0.5)));
        break;
      case ValueType::IntList: {
        auto n = rng.uniform(cfg.list_len_range.first, cfg.list_len_range.second);
        IntList items;
        for (Int i = 0; i < n; ++i) items.push_back(rng.uniform(0, cfg.element_cap));
        args.push_back(Value::list(std::move(items)));
        break;
      }
    }
  }
  return args;
}

std::string config_hash(const GenConfig& cfg) {
  auto j = gen_config_to_json(cfg);
  j.erase("seed");
  return hex64(fnv1a64(j.dump()));
}

}  // namespace tracebench
