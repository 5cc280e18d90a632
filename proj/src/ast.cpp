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

#include "tracebench/ast.hpp"

#include <stdexcept>

namespace tracebench {

bool is_var(const Operand& operand) { return std::holds_alternative<VarRef>(operand); }

Index make_index(std::string list, Operand subscript, OperandRules rules) {
  if (type_of_name(list) != ValueType::IntList) {
    throw std::invalid_argument("index target '" + list + "' is not a list");
  }
  if (is_var(subscript) && !rules.allow_var_index) {
    throw std::invalid_argument("list subscript must be a literal");
  }
  return Index{std::move(list), std::move(subscript)};
}

Arith make_arith(ArithOp op, Operand lhs, Operand rhs, OperandRules rules) {
  if (is_var(lhs) && is_var(rhs) && !rules.allow_var_var) {
    throw std::invalid_argument("arithmetic with two variable operands");
  }
  return Arith{op, std::move(lhs), std::move(rhs)};
}

Cmp make_cmp(CmpOp op, Operand lhs, Operand rhs, OperandRules rules) {
  if (is_var(lhs) && is_var(rhs) && !rules.allow_var_var) {
    throw std::invalid_argument("comparison with two variable operands");
  }
  return Cmp{op, std::move(lhs), std::move(rhs)};
}

bool operator==(const If& a, const If& b) { return a.cond == b.cond && a.body == b.body; }

bool operator==(const While& a, const While& b) {
  return a.cond == b.cond && a.body == b.body && a.counter == b.counter &&
         a.increment == b.increment && a.bound == b.bound && a.lines == b.lines;
}

bool operator==(const WhileTrue& a, const WhileTrue& b) { return a.body == b.body; }

std::string render_operand(const Operand& operand) {
  if (const auto* lit = std::get_if<Literal>(&operand)) return std::to_string(lit->value);
  return std::get<VarRef>(operand).name;
}

namespace {

struct ExprRenderer {
  std::string operator()(const Literal& lit) const { return std::to_string(lit.value); }
  std::string operator()(const VarRef& ref) const { return ref.name; }
  std::string operator()(const Index& idx) const {
    return idx.list + "[" + render_operand(idx.subscript) + "]";
  }
  std::string operator()(const Arith& a) const {
    return render_operand(a.lhs) + (a.op == ArithOp::Add ? " + " : " - ") +
           render_operand(a.rhs);
  }
  std::string operator()(const Cmp& c) const {
    return render_operand(c.lhs) + (c.op == CmpOp::Eq ? " == " : " != ") +
           render_operand(c.rhs);
  }
};

}  // namespace

std::string render_expr(const Expr& expr) { return std::visit(ExprRenderer{}, expr); }

}  // namespace tracebench
