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

#include "tracebench/trace.hpp"

#include <cctype>
#include <map>

namespace tracebench {

std::string render_step(const TraceStep& step) {
  std::string out = "L" + std::to_string(step.line) + ",";
  if (step.update) {
    out += step.update->name;
    out += ':';
    out += render_value(step.update->value, RenderMode::Compact);
  }
  return out;
}

namespace {

bool valid_name(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

bool valid_compact_value(std::string_view s) {
  if (s == "True" || s == "False") return true;
  auto valid_int = [](std::string_view t) {
    if (!t.empty() && t[0] == '-') t.remove_prefix(1);
    if (t.empty()) return false;
    for (char c : t) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
  };
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    std::string_view body = s.substr(1, s.size() - 2);
    if (body.empty()) return true;
    std::size_t start = 0;
    while (true) {
      auto comma = body.find(',', start);
      if (!valid_int(body.substr(start, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - start))) {
        return false;
      }
      if (comma == std::string_view::npos) return true;
      start = comma + 1;
    }
  }
  return valid_int(s);
}

}  // namespace

std::optional<TraceStep> parse_step(std::string_view text) {
  if (text.size() < 3 || text[0] != 'L') return std::nullopt;
  std::size_t i = 1;
  int line = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    if (line > 100'000'000) return std::nullopt;
    line = line * 10 + (text[i] - '0');
    ++i;
  }
  if (i == 1 || i >= text.size() || text[i] != ',' || line <= 0) return std::nullopt;
  std::string_view rest = text.substr(i + 1);
  TraceStep step{line, std::nullopt};
  if (rest.empty()) return step;
  auto colon = rest.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  std::string_view name = rest.substr(0, colon);
  std::string_view value = rest.substr(colon + 1);
  if (!valid_name(name) || !valid_compact_value(value)) return std::nullopt;
  step.update = Update{std::string(name), parse_value(value)};
  return step;
}

std::vector<std::string> trace_lines(const Trace& trace) {
  std::vector<std::string> out;
  out.reserve(trace.steps.size());
  for (const auto& step : trace.steps) out.push_back(render_step(step));
  return out;
}

std::string trace_to_text(const Trace& trace) {
  std::string out;
  for (const auto& step : trace.steps) {
    if (!out.empty()) out += '\n';
    out += render_step(step);
  }
  return out;
}

Trace lines_to_trace(std::span<const std::string> lines) {
  Trace trace;
  trace.steps.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto step = parse_step(lines[i]);
    if (!step) throw TraceParseError(i, "not a trace step: '" + lines[i] + "'");
    trace.steps.push_back(std::move(*step));
  }
  return trace;
}

Trace text_to_trace(std::string_view text) {
  std::vector<std::string> lines;
  if (!text.empty()) {
    std::size_t start = 0;
    while (true) {
      auto nl = text.find('\n', start);
      lines.emplace_back(text.substr(start, nl == std::string_view::npos ? nl : nl - start));
      if (nl == std::string_view::npos) break;
      start = nl + 1;
    }
  }
  return lines_to_trace(lines);
}

std::string_view to_string(ExecErrorKind kind) {
  switch (kind) {
    case ExecErrorKind::PopEmpty:
      return "pop-empty";
    case ExecErrorKind::IndexOutOfRange:
      return "index-out-of-range";
    case ExecErrorKind::StepLimitExceeded:
      return "step-limit-exceeded";
    case ExecErrorKind::UndefinedVariable:
      return "undefined-variable";
  }
  return "undefined-variable";
}

namespace {

struct Halt {};  // unwinds out of nested blocks on `return`

struct Fault {
  ExecError error;
};

class Interpreter {
 public:
  explicit Interpreter(std::size_t step_limit) : step_limit_(step_limit) {}

  void bind(const std::string& name, Value value) { env_[name] = std::move(value); }

  void run(const Block& body) {
    try {
      block(body);
    } catch (const Halt&) {
    }
  }

  Trace take() { return std::move(trace_); }

 private:
  [[noreturn]] void fail(ExecErrorKind kind, int line, std::string detail) {
    throw Fault{ExecError{kind, line, std::move(detail)}};
  }

  void emit(int line, std::optional<Update> update = std::nullopt) {
    if (trace_.steps.size() >= step_limit_) {
      fail(ExecErrorKind::StepLimitExceeded, line,
           "more than " + std::to_string(step_limit_) + " steps");
    }
    trace_.steps.push_back(TraceStep{line, std::move(update)});
  }

  Value& lookup(const std::string& name, ValueType type, int line) {
    auto it = env_.find(name);
    if (it == env_.end() || it->second.type() != type) {
      fail(ExecErrorKind::UndefinedVariable, line,
           "no " + std::string(to_string(type)) + " variable '" + name + "'");
    }
    return it->second;
  }

  Int operand(const Operand& op, int line) {
    if (const auto* lit = std::get_if<Literal>(&op)) return lit->value;
    return lookup(std::get<VarRef>(op).name, ValueType::Int, line).as_int();
  }

  bool compare(const Cmp& c, int line) {
    Int lhs = operand(c.lhs, line);
    Int rhs = operand(c.rhs, line);
    return c.op == CmpOp::Eq ? lhs == rhs : lhs != rhs;
  }

  Value eval(const Expr& expr, int line) {
    return std::visit(
        [&](const auto& e) -> Value {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, Literal>) {
            return Value::integer(e.value);
          } else if constexpr (std::is_same_v<T, VarRef>) {
            return Value::integer(lookup(e.name, ValueType::Int, line).as_int());
          } else if constexpr (std::is_same_v<T, Index>) {
            const auto& items = lookup(e.list, ValueType::IntList, line).as_list();
            Int at = operand(e.subscript, line);
            // Python-style negative indices are valid for var-index ablations.
            Int n = static_cast<Int>(items.size());
            if (at < -n || at >= n) {
              fail(ExecErrorKind::IndexOutOfRange, line,
                   e.list + "[" + std::to_string(at) + "] with length " + std::to_string(n));
            }
            return Value::integer(items[static_cast<std::size_t>(at < 0 ? at + n : at)]);
          } else if constexpr (std::is_same_v<T, Arith>) {
            Int lhs = operand(e.lhs, line);
            Int rhs = operand(e.rhs, line);
            return Value::integer(e.op == ArithOp::Add ? lhs + rhs : lhs - rhs);
          } else {
            return Value::boolean(compare(e, line));
          }
        },
        expr);
  }

  void assign(const std::string& name, Value value, int line) {
    env_[name] = value;
    emit(line, Update{name, std::move(value)});
  }

  void block(const Block& body) {
    for (const auto& stmt : body) statement(stmt);
  }

  void statement(const Stmt& stmt) {
    const int line = stmt.line;
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, Assign>) {
            assign(node.target, eval(node.value, line), line);
          } else if constexpr (std::is_same_v<T, BoolAssign>) {
            assign(node.target, Value::boolean(compare(node.value, line)), line);
          } else if constexpr (std::is_same_v<T, Append>) {
            Int item = operand(node.item, line);
            auto& list = lookup(node.list, ValueType::IntList, line);
            list.as_list().push_back(item);
            emit(line, Update{node.list, list});
          } else if constexpr (std::is_same_v<T, Pop>) {
            auto& list = lookup(node.list, ValueType::IntList, line);
            if (list.as_list().empty()) {
              fail(ExecErrorKind::PopEmpty, line, "pop from empty list " + node.list);
            }
            list.as_list().pop_back();
            emit(line, Update{node.list, list});
          } else if constexpr (std::is_same_v<T, If>) {
            bool taken = lookup(node.cond, ValueType::Bool, line).as_bool();
            emit(line);
            if (taken) block(node.body);
          } else if constexpr (std::is_same_v<T, While>) {
            const WhileLines& at = node.lines;
            assign(node.counter, Value::integer(0), at.init);
            assign(node.cond, Value::boolean(bound_differs(node, at.check)), at.check);
            while (true) {
              bool again = lookup(node.cond, ValueType::Bool, at.header).as_bool();
              emit(at.header);
              if (!again) break;
              block(node.body);
              Int next = lookup(node.counter, ValueType::Int, at.increment).as_int() +
                         node.increment;
              assign(node.counter, Value::integer(next), at.increment);
              assign(node.cond, Value::boolean(bound_differs(node, at.recheck)), at.recheck);
            }
          } else if constexpr (std::is_same_v<T, WhileTrue>) {
            while (true) {
              emit(line);
              block(node.body);
            }
          } else {
            emit(line);
            throw Halt{};
          }
        },
        stmt.node);
  }

  bool bound_differs(const While& loop, int line) {
    return lookup(loop.counter, ValueType::Int, line).as_int() != loop.bound;
  }

  std::size_t step_limit_;
  std::map<std::string, Value, std::less<>> env_;
  Trace trace_;
};

}  // namespace

ExecResult execute(const Program& program, std::span<const Value> args,
                   std::size_t step_limit) {
  const auto& params = program.params();
  if (args.size() != params.size()) {
    throw std::invalid_argument("expected " + std::to_string(params.size()) +
                                " arguments, got " + std::to_string(args.size()));
  }
  Interpreter interp(step_limit);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (args[i].type() != params[i].type) {
      throw std::invalid_argument("argument '" + params[i].name + "' has the wrong type");
    }
    interp.bind(params[i].name, args[i]);
  }
  try {
    interp.run(program.body());
  } catch (const Fault& f) {
    return f.error;
  }
  return interp.take();
}

}  // namespace tracebench
