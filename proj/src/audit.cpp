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

#include "tracebench/audit.hpp"

#include <regex>

namespace tracebench {

namespace {

const std::regex kIdent{R"([A-Za-z_][A-Za-z0-9_]*)"};
const std::regex kLiteral{R"(\d+)"};
const std::regex kNumbered{R"(L(\d+) ( *)(.*))"};
const std::regex kSignature{R"(def function\(([A-Za-z0-9_, ]*)\):)"};
const std::regex kIf{R"(if ([A-Za-z_][A-Za-z0-9_]*):)"};
const std::regex kWhile{R"(while ([A-Za-z_][A-Za-z0-9_]*):)"};
const std::regex kAppend{R"(([A-Za-z_][A-Za-z0-9_]*)\.append\((.*)\))"};
const std::regex kPop{R"(([A-Za-z_][A-Za-z0-9_]*)\.pop\(\))"};
const std::regex kAssign{R"(([A-Za-z_][A-Za-z0-9_]*) = (.+))"};
const std::regex kSubscript{R"(([A-Za-z_][A-Za-z0-9_]*)\[(.*)\])"};

bool is_ident(const std::string& s) { return std::regex_match(s, kIdent) && s != "True" && s != "False"; }
bool is_literal(const std::string& s) { return std::regex_match(s, kLiteral); }
bool is_operand(const std::string& s) { return is_ident(s) || is_literal(s); }

std::vector<std::string> tokens(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto j = s.find(' ', i);
    out.push_back(s.substr(i, j == std::string::npos ? std::string::npos : j - i));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

// Empty when `expr` is a permitted right-hand side.
std::string check_expr(const std::string& expr) {
  std::smatch m;
  if (std::regex_match(expr, m, kSubscript)) {
    return is_literal(m[2].str()) ? "" : "non-literal list index '" + expr + "'";
  }
  const auto t = tokens(expr);
  if (t.size() == 1) return is_operand(t[0]) ? "" : "unrecognized expression '" + expr + "'";
  if (t.size() != 3) return "unrecognized expression '" + expr + "'";
  const auto& op = t[1];
  if (op != "+" && op != "-" && op != "==" && op != "!=") return "operator '" + op + "' not allowed";
  if (!is_operand(t[0]) || !is_operand(t[2])) return "unrecognized expression '" + expr + "'";
  if (is_ident(t[0]) && is_ident(t[2])) return "two-variable operands in '" + expr + "'";
  return "";
}

struct Line {
  int number = 0;
  int depth = 0;
  std::string text;
};

}  // namespace

std::vector<std::string> audit_listing(std::span<const std::string> listing, const AuditLimits& limits) {
  std::vector<std::string> errors;
  auto flag = [&](int line, const std::string& what) {
    errors.push_back("L" + std::to_string(line) + ": " + what);
  };
  if (static_cast<int>(listing.size()) > limits.max_loc) {
    errors.push_back(std::to_string(listing.size()) + " lines exceed the limit of " +
                     std::to_string(limits.max_loc));
  }

  std::vector<Line> lines;
  for (std::size_t i = 0; i < listing.size(); ++i) {
    std::smatch m;
    if (!std::regex_match(listing[i], m, kNumbered) || std::stoi(m[1].str()) != static_cast<int>(i + 1)) {
      errors.push_back("line " + std::to_string(i + 1) + " is not numbered L" + std::to_string(i + 1));
      return errors;
    }
    const auto indent = static_cast<int>(m[2].length());
    if (indent % 4 != 0) flag(static_cast<int>(i + 1), "indentation is not a multiple of four");
    lines.push_back({static_cast<int>(i + 1), indent / 4 - 1, m[3].str()});
  }
  if (lines.empty()) return {"empty listing"};
  if (lines[0].depth != -1 || !std::regex_match(lines[0].text, kSignature)) {
    flag(1, "missing function signature");
  }
  if (lines.back().text != "return" || lines.back().depth != 0) {
    flag(lines.back().number, "listing does not end in a top-level return");
  }

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& ln = lines[i];
    const auto& s = ln.text;
    std::smatch m;
    if (ln.depth < 0) {
      flag(ln.number, "statement outside the function body");
      continue;
    }
    if (ln.depth > limits.max_depth) flag(ln.number, "nesting depth " + std::to_string(ln.depth) + " exceeds the limit");
    if (i > 1 && ln.depth > lines[i - 1].depth &&
        !(std::regex_match(lines[i - 1].text, kIf) || std::regex_match(lines[i - 1].text, kWhile))) {
      flag(ln.number, "indented without an opening block");
    }
    if (s == "return") {
      if (i + 1 != lines.size()) flag(ln.number, "return before the last line");
    } else if (s.rfind("else", 0) == 0 || s.rfind("elif", 0) == 0) {
      flag(ln.number, "'" + s + "' is not part of the grammar");
    } else if (std::regex_match(s, m, kIf)) {
      if (i + 1 >= lines.size() || lines[i + 1].depth != ln.depth + 1) flag(ln.number, "empty if block");
    } else if (std::regex_match(s, m, kWhile)) {
      const auto cond = m[1].str();
      if (cond == "True") {
        flag(ln.number, "while True has no exit");
        continue;
      }
      // counter = 0 / cond = counter != N / while cond: / body / counter += i / cond re-check
      std::smatch init, check;
      const bool head_ok = i >= 3 && std::regex_match(lines[i - 2].text, init, kAssign) &&
                           init[2].str() == "0" && lines[i - 2].depth == ln.depth &&
                           std::regex_match(lines[i - 1].text, check, kAssign) &&
                           check[1].str() == cond && lines[i - 1].depth == ln.depth;
      if (!head_ok) {
        flag(ln.number, "loop is not preceded by its counter initialisation and condition");
        continue;
      }
      const auto counter = init[1].str();
      const auto ct = tokens(check[2].str());
      if (ct.size() != 3 || ct[0] != counter || ct[1] != "!=" || !is_literal(ct[2])) {
        flag(ln.number, "loop condition is not 'counter != bound'");
        continue;
      }
      std::size_t end = i + 1;
      while (end < lines.size() && lines[end].depth > ln.depth) ++end;
      if (end - i < 4) {
        flag(ln.number, "loop body too short for its counter update");
        continue;
      }
      const auto& inc = lines[end - 2].text;
      const auto& recheck = lines[end - 1].text;
      const std::string inc_prefix = counter + " = " + counter + " + ";
      if (inc.rfind(inc_prefix, 0) != 0 || !is_literal(inc.substr(inc_prefix.size())) ||
          recheck != check[0].str()) {
        flag(ln.number, "loop does not end with its counter increment and condition re-check");
        continue;
      }
      const Int bound = std::stoll(ct[2]);
      const Int step = std::stoll(inc.substr(inc_prefix.size()));
      if (bound > limits.while_bound_cap) flag(ln.number, "loop bound " + ct[2] + " exceeds the cap");
      if (step <= 0 || bound % step != 0) {
        flag(ln.number, "loop bound " + ct[2] + " is not a multiple of increment " + std::to_string(step));
      }
      for (std::size_t k = i + 1; k + 2 < end; ++k) {
        if (lines[k].text.rfind(counter + " =", 0) == 0) flag(lines[k].number, "loop body reassigns its counter");
      }
    } else if (std::regex_match(s, m, kAppend)) {
      if (!is_operand(m[2].str())) flag(ln.number, "append argument is not a plain operand");
    } else if (std::regex_match(s, m, kAssign)) {
      if (auto e = check_expr(m[2].str()); !e.empty()) flag(ln.number, e);
    } else if (!std::regex_match(s, kPop)) {
      flag(ln.number, "unrecognized statement '" + s + "'");
    }
  }
  return errors;
}

}  // namespace tracebench
