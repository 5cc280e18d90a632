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

#include "tracebench/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace tracebench {

namespace {

constexpr std::string_view kIndent = "    ";

std::string line_prefix(int number, int depth) {
  std::string out = "L" + std::to_string(number) + " ";
  for (int i = 0; i < depth; ++i) out += kIndent;
  return out;
}

std::string loop_check_text(const While& w) {
  return w.cond + " = " + w.counter + " != " + std::to_string(w.bound);
}

class Numberer {
 public:
  explicit Numberer(std::vector<std::string>& lines) : lines_(lines) {}

  void block(Block& body, int depth) {
    for (auto& stmt : body) statement(stmt, depth);
  }

 private:
  void emit(int depth, const std::string& text) {
    int number = static_cast<int>(lines_.size()) + 1;
    lines_.push_back(line_prefix(number, depth) + text);
  }
  int next() const { return static_cast<int>(lines_.size()) + 1; }

  void statement(Stmt& stmt, int depth) {
    std::visit(
        [&](auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Assign>) {
            stmt.line = next();
            emit(depth, node.target + " = " + render_expr(node.value));
          } else if constexpr (std::is_same_v<T, BoolAssign>) {
            stmt.line = next();
            emit(depth, node.target + " = " + render_expr(Expr{node.value}));
          } else if constexpr (std::is_same_v<T, Append>) {
            stmt.line = next();
            emit(depth, node.list + ".append(" + render_operand(node.item) + ")");
          } else if constexpr (std::is_same_v<T, Pop>) {
            stmt.line = next();
            emit(depth, node.list + ".pop()");
          } else if constexpr (std::is_same_v<T, If>) {
            stmt.line = next();
            emit(depth, "if " + node.cond + ":");
            block(node.body, depth + 1);
          } else if constexpr (std::is_same_v<T, While>) {
            node.lines.init = next();
            emit(depth, node.counter + " = 0");
            node.lines.check = next();
            emit(depth, loop_check_text(node));
            node.lines.header = next();
            stmt.line = node.lines.header;
            emit(depth, "while " + node.cond + ":");
            block(node.body, depth + 1);
            node.lines.increment = next();
            emit(depth + 1, node.counter + " = " + node.counter + " + " +
                                std::to_string(node.increment));
            node.lines.recheck = next();
            emit(depth + 1, loop_check_text(node));
          } else if constexpr (std::is_same_v<T, WhileTrue>) {
            stmt.line = next();
            emit(depth, "while True:");
            block(node.body, depth + 1);
          } else {
            stmt.line = next();
            emit(depth, "return");
          }
        },
        stmt.node);
  }

  std::vector<std::string>& lines_;
};

}  // namespace

Program::Program(std::vector<Param> params, Block body, std::string config_hash,
                 std::uint64_t seed)
    : params_(std::move(params)),
      body_(std::move(body)),
      config_hash_(std::move(config_hash)),
      seed_(seed) {
  std::string signature = "def function(";
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i != 0) signature += ", ";
    signature += params_[i].name;
  }
  signature += "):";
  lines_.push_back(line_prefix(1, 0) + signature);
  Numberer(lines_).block(body_, 1);
}

std::string render_program(const Program& program) {
  std::string out;
  for (const auto& line : program.lines()) {
    if (!out.empty()) out += '\n';
    out += line;
  }
  return out;
}

std::string render_call(std::span<const Param> params, std::span<const Value> args) {
  if (params.size() != args.size()) {
    throw std::invalid_argument("call arity mismatch: " + std::to_string(params.size()) +
                                " params, " + std::to_string(args.size()) + " args");
  }
  std::string out = "function(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i != 0) out += ", ";
    out += params[i].name + "=" + render_value(args[i], RenderMode::Spaced);
  }
  out += ')';
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

struct SourceLine {
  int depth = 0;
  std::string text;
};

class ProgramParser {
 public:
  explicit ProgramParser(std::vector<SourceLine> lines) : lines_(std::move(lines)) {}

  std::vector<Param> signature() {
    const std::string& text = lines_[0].text;
    constexpr std::string_view head = "def function(";
    if (lines_[0].depth != 0 || !text.starts_with(head) || !text.ends_with("):")) {
      throw ParseError(0, "expected `def function(...):`");
    }
    std::string_view inner(text);
    inner = inner.substr(head.size(), inner.size() - head.size() - 2);
    std::vector<Param> params;
    while (!inner.empty()) {
      auto comma = inner.find(", ");
      std::string_view name = inner.substr(0, comma);
      if (!is_identifier(name)) throw ParseError(0, "bad parameter name");
      params.push_back(Param{std::string(name), type_of_name(name)});
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 2);
    }
    return params;
  }

  Block block(int depth) {
    Block out;
    while (pos_ < lines_.size()) {
      const SourceLine& line = lines_[pos_];
      if (line.depth < depth) break;
      if (line.depth > depth) throw ParseError(pos_, "unexpected indentation");
      out.push_back(statement(depth, out));
    }
    return out;
  }

  std::size_t position() const { return pos_; }

 private:
  Operand operand(std::string_view text) {
    if (is_identifier(text)) return VarRef{std::string(text)};
    Int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw ParseError(pos_, "bad operand '" + std::string(text) + "'");
    }
    return Literal{value};
  }

  Expr rhs(std::string_view text) {
    constexpr OperandRules relaxed{true, true};
    for (auto [token, op] : {std::pair{" == ", CmpOp::Eq}, std::pair{" != ", CmpOp::Ne}}) {
      if (auto at = text.find(token); at != std::string_view::npos) {
        return make_cmp(op, operand(text.substr(0, at)), operand(text.substr(at + 4)),
                        relaxed);
      }
    }
    for (auto [token, op] : {std::pair{" + ", ArithOp::Add}, std::pair{" - ", ArithOp::Sub}}) {
      if (auto at = text.find(token); at != std::string_view::npos) {
        return make_arith(op, operand(text.substr(0, at)), operand(text.substr(at + 3)),
                          relaxed);
      }
    }
    if (auto open = text.find('['); open != std::string_view::npos && text.back() == ']') {
      std::string_view list = text.substr(0, open);
      std::string_view sub = text.substr(open + 1, text.size() - open - 2);
      if (!is_identifier(list)) throw ParseError(pos_, "bad list name");
      try {
        return make_index(std::string(list), operand(sub), relaxed);
      } catch (const std::invalid_argument& e) {
        throw ParseError(pos_, e.what());
      }
    }
    Operand op = operand(text);
    if (const auto* lit = std::get_if<Literal>(&op)) return *lit;
    return std::get<VarRef>(op);
  }

  static bool is_loop_init(const Stmt& s, std::string_view counter) {
    const auto* a = std::get_if<Assign>(&s.node);
    if (!a || a->target != counter) return false;
    const auto* lit = std::get_if<Literal>(&a->value);
    return lit && lit->value == 0;
  }

  // `cond = counter != bound`; returns the bound or -1.
  static Int loop_check_bound(const Stmt& s, std::string_view cond, std::string_view counter) {
    const auto* b = std::get_if<BoolAssign>(&s.node);
    if (!b || b->target != cond || b->value.op != CmpOp::Ne) return -1;
    const auto* lhs = std::get_if<VarRef>(&b->value.lhs);
    const auto* rhs = std::get_if<Literal>(&b->value.rhs);
    if (!lhs || lhs->name != counter || !rhs) return -1;
    return rhs->value;
  }

  Stmt statement(int depth, Block& preceding) {
    const std::size_t here = pos_;
    std::string_view text = lines_[pos_].text;
    ++pos_;
    Stmt stmt;
    if (text == "return") {
      stmt.node = Return{};
    } else if (text == "while True:") {
      stmt.node = WhileTrue{block(depth + 1)};
    } else if (text.starts_with("if ") && text.ends_with(":")) {
      std::string cond(text.substr(3, text.size() - 4));
      if (!is_identifier(cond)) throw ParseError(here, "bad condition variable");
      Block body = block(depth + 1);
      if (body.empty()) throw ParseError(here, "empty if block");
      stmt.node = If{std::move(cond), std::move(body)};
    } else if (text.starts_with("while ") && text.ends_with(":")) {
      stmt.node = counted_loop(here, depth, std::string(text.substr(6, text.size() - 7)),
                               preceding);
    } else if (text.ends_with(".pop()")) {
      std::string list(text.substr(0, text.size() - 6));
      if (!is_identifier(list)) throw ParseError(here, "bad list name");
      stmt.node = Pop{std::move(list)};
    } else if (auto at = text.find(".append("); at != std::string_view::npos &&
                                                text.ends_with(")")) {
      std::string list(text.substr(0, at));
      if (!is_identifier(list)) throw ParseError(here, "bad list name");
      std::string_view arg = text.substr(at + 8, text.size() - at - 9);
      stmt.node = Append{std::move(list), operand(arg)};
    } else if (auto eq = text.find(" = "); eq != std::string_view::npos) {
      std::string target(text.substr(0, eq));
      if (!is_identifier(target)) throw ParseError(here, "bad assignment target");
      Expr value = rhs(text.substr(eq + 3));
      if (auto* cmp = std::get_if<Cmp>(&value)) {
        stmt.node = BoolAssign{std::move(target), std::move(*cmp)};
      } else {
        stmt.node = Assign{std::move(target), std::move(value)};
      }
    } else {
      throw ParseError(here, "unrecognized statement '" + std::string(text) + "'");
    }
    return stmt;
  }

  While counted_loop(std::size_t here, int depth, std::string cond, Block& preceding) {
    if (!is_identifier(cond)) throw ParseError(here, "bad loop condition variable");
    if (preceding.size() < 2) throw ParseError(here, "loop without counter set-up");
    const Stmt& init = preceding[preceding.size() - 2];
    const auto* init_assign = std::get_if<Assign>(&init.node);
    if (!init_assign) throw ParseError(here, "loop without counter set-up");
    std::string counter = init_assign->target;
    Int bound = loop_check_bound(preceding.back(), cond, counter);
    if (!is_loop_init(init, counter) || bound < 0) {
      throw ParseError(here, "loop without counter set-up");
    }
    preceding.resize(preceding.size() - 2);

    Block body = block(depth + 1);
    if (body.size() < 3) throw ParseError(here, "loop body too short");
    const auto* inc = std::get_if<Assign>(&body[body.size() - 2].node);
    const Arith* step = inc ? std::get_if<Arith>(&inc->value) : nullptr;
    if (!step || inc->target != counter || step->op != ArithOp::Add ||
        !is_var(step->lhs) || std::get<VarRef>(step->lhs).name != counter ||
        is_var(step->rhs) || loop_check_bound(body.back(), cond, counter) != bound) {
      throw ParseError(here, "loop without counter increment and re-check");
    }
    Int increment = std::get<Literal>(step->rhs).value;
    body.resize(body.size() - 2);

    While loop;
    loop.cond = std::move(cond);
    loop.body = std::move(body);
    loop.counter = std::move(counter);
    loop.increment = increment;
    loop.bound = bound;
    return loop;
  }

  std::vector<SourceLine> lines_;
  std::size_t pos_ = 1;
};

}  // namespace

Program parse_program(std::span<const std::string> lines, std::string config_hash,
                      std::uint64_t seed) {
  if (lines.empty()) throw ParseError(0, "empty program");
  std::vector<SourceLine> source;
  source.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string expected = "L" + std::to_string(i + 1) + " ";
    if (!lines[i].starts_with(expected)) {
      throw ParseError(i, "expected line number prefix '" + expected + "'");
    }
    std::string_view rest = std::string_view(lines[i]).substr(expected.size());
    std::size_t spaces = rest.find_first_not_of(' ');
    if (spaces == std::string_view::npos) throw ParseError(i, "blank line");
    if (spaces % kIndent.size() != 0) throw ParseError(i, "indentation not a multiple of 4");
    source.push_back(SourceLine{static_cast<int>(spaces / kIndent.size()),
                                std::string(rest.substr(spaces))});
  }

  ProgramParser parser(std::move(source));
  std::vector<Param> params = parser.signature();
  Block body = parser.block(1);
  if (parser.position() != lines.size()) {
    throw ParseError(parser.position(), "statement outside the function body");
  }
  Program program(std::move(params), std::move(body), std::move(config_hash), seed);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (program.lines()[i] != lines[i]) {
      throw ParseError(i, "listing is not in canonical form");
    }
  }
  return program;
}

std::vector<Value> parse_call(std::string_view text, std::span<const Param> params) {
  constexpr std::string_view head = "function(";
  if (!text.starts_with(head) || !text.ends_with(")")) {
    throw std::invalid_argument("expected `function(...)`");
  }
  std::string_view rest = text.substr(head.size(), text.size() - head.size() - 1);
  std::vector<Value> args;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i != 0) {
      if (!rest.starts_with(", ")) throw std::invalid_argument("expected ', ' between args");
      rest.remove_prefix(2);
    }
    const std::string key = params[i].name + "=";
    if (!rest.starts_with(key)) {
      throw std::invalid_argument("expected argument '" + params[i].name + "'");
    }
    rest.remove_prefix(key.size());
    std::size_t end = 0;
    if (rest.starts_with("[")) {
      end = rest.find(']');
      if (end == std::string_view::npos) throw std::invalid_argument("unterminated list");
      ++end;
    } else {
      end = std::min(rest.find(", "), rest.size());
    }
    Value v = parse_value(rest.substr(0, end));
    if (v.type() != params[i].type) {
      throw std::invalid_argument("argument '" + params[i].name + "' has the wrong type");
    }
    args.push_back(std::move(v));
    rest.remove_prefix(end);
  }
  if (!rest.empty()) throw std::invalid_argument("trailing text after arguments");
  return args;
}

namespace {

void collect_lines(const Block& body, std::vector<int>& out) {
  for (const auto& stmt : body) {
    if (const auto* w = std::get_if<While>(&stmt.node)) {
      out.push_back(w->lines.init);
      out.push_back(w->lines.check);
      out.push_back(w->lines.header);
      collect_lines(w->body, out);
      out.push_back(w->lines.increment);
      out.push_back(w->lines.recheck);
    } else {
      out.push_back(stmt.line);
      if (const auto* i = std::get_if<If>(&stmt.node)) collect_lines(i->body, out);
      if (const auto* t = std::get_if<WhileTrue>(&stmt.node)) collect_lines(t->body, out);
    }
  }
}

}  // namespace

std::vector<int> statement_lines(const Program& program) {
  std::vector<int> out;
  collect_lines(program.body(), out);
  return out;
}

int nesting_depth(const Block& body) {
  int depth = 0;
  for (const auto& stmt : body) {
    const Block* inner = nullptr;
    if (const auto* i = std::get_if<If>(&stmt.node)) inner = &i->body;
    if (const auto* w = std::get_if<While>(&stmt.node)) inner = &w->body;
    if (const auto* t = std::get_if<WhileTrue>(&stmt.node)) inner = &t->body;
    if (inner) depth = std::max(depth, 1 + nesting_depth(*inner));
  }
  return depth;
}

}  // namespace tracebench
