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

#include <string>
#include <variant>
#include <vector>

#include "tracebench/value.hpp"

namespace tracebench {

struct Literal {
  Int value = 0;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct VarRef {
  std::string name;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

using Operand = std::variant<Literal, VarRef>;

enum class ArithOp { Add, Sub };
enum class CmpOp { Eq, Ne };

// Relaxations used only by the single-feature ablation configs.
struct OperandRules {
  bool allow_var_var = false;
  bool allow_var_index = false;
};

struct Index {
  std::string list;
  Operand subscript;
  friend bool operator==(const Index&, const Index&) = default;
};

struct Arith {
  ArithOp op = ArithOp::Add;
  Operand lhs;
  Operand rhs;
  friend bool operator==(const Arith&, const Arith&) = default;
};

struct Cmp {
  CmpOp op = CmpOp::Eq;
  Operand lhs;
  Operand rhs;
  friend bool operator==(const Cmp&, const Cmp&) = default;
};

using Expr = std::variant<Literal, VarRef, Index, Arith, Cmp>;

// Checked constructors. Each throws std::invalid_argument when the operands
// break the grammar restrictions under `rules`.
Index make_index(std::string list, Operand subscript, OperandRules rules = {});
Arith make_arith(ArithOp op, Operand lhs, Operand rhs, OperandRules rules = {});
Cmp make_cmp(CmpOp op, Operand lhs, Operand rhs, OperandRules rules = {});

bool is_var(const Operand& operand);

struct Stmt;
using Block = std::vector<Stmt>;

struct Assign {
  std::string target;
  Expr value;  // never a Cmp; boolean assignments use BoolAssign
  friend bool operator==(const Assign&, const Assign&) = default;
};

struct BoolAssign {
  std::string target;
  Cmp value;
  friend bool operator==(const BoolAssign&, const BoolAssign&) = default;
};

struct Append {
  std::string list;
  Operand item;
  friend bool operator==(const Append&, const Append&) = default;
};

struct Pop {
  std::string list;
  friend bool operator==(const Pop&, const Pop&) = default;
};

struct If {
  std::string cond;
  Block body;
  friend bool operator==(const If&, const If&);
};

// Source lines a counted loop occupies besides its body.
struct WhileLines {
  int init = 0;       // counter = 0
  int check = 0;      // cond = counter != bound
  int header = 0;     // while cond:
  int increment = 0;  // counter = counter + step
  int recheck = 0;    // cond = counter != bound
  friend bool operator==(const WhileLines&, const WhileLines&) = default;
};

// Counted loop: counter init, condition assignment, header, body, counter
// increment and condition re-assignment. Terminates iff bound % increment == 0.
struct While {
  std::string cond;
  Block body;
  std::string counter = "cnter";
  Int increment = 1;
  Int bound = 1;
  WhileLines lines;
  friend bool operator==(const While&, const While&);
};

// `while True:` with no exit production; only behind a generator flag.
struct WhileTrue {
  Block body;
  friend bool operator==(const WhileTrue&, const WhileTrue&);
};

struct Return {
  friend bool operator==(const Return&, const Return&) = default;
};

struct Stmt {
  std::variant<Assign, BoolAssign, Append, Pop, If, While, WhileTrue, Return> node;
  // Source line; for a counted loop this is the `while` header.
  int line = 0;
  friend bool operator==(const Stmt&, const Stmt&) = default;
};

std::string render_operand(const Operand& operand);
std::string render_expr(const Expr& expr);

}  // namespace tracebench
