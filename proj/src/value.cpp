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

#include "tracebench/value.hpp"

#include <charconv>
#include <stdexcept>

namespace tracebench {

std::string_view to_string(ValueType type) {
  switch (type) {
    case ValueType::Int:
      return "int";
    case ValueType::Bool:
      return "bool";
    case ValueType::IntList:
      return "list";
  }
  return "int";
}

ValueType value_type_from_string(std::string_view text) {
  if (text == "int") return ValueType::Int;
  if (text == "bool") return ValueType::Bool;
  if (text == "list") return ValueType::IntList;
  throw std::invalid_argument("unknown value type '" + std::string(text) + "'");
}

ValueType type_of_name(std::string_view name) {
  if (name.starts_with("lst_")) return ValueType::IntList;
  if (name.starts_with("cond_")) return ValueType::Bool;
  return ValueType::Int;
}

ValueType Value::type() const {
  if (is_int()) return ValueType::Int;
  if (is_bool()) return ValueType::Bool;
  return ValueType::IntList;
}

std::string render_value(const Value& v, RenderMode mode) {
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_bool()) return v.as_bool() ? "True" : "False";
  const char* sep = mode == RenderMode::Compact ? "," : ", ";
  std::string out = "[";
  const auto& items = v.as_list();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += sep;
    out += std::to_string(items[i]);
  }
  out += ']';
  return out;
}

namespace {

Int parse_int(std::string_view text) {
  Int value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Value parse_value(std::string_view text) {
  if (text == "True") return Value::boolean(true);
  if (text == "False") return Value::boolean(false);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') {
      throw std::invalid_argument("unterminated list: '" + std::string(text) + "'");
    }
    std::string_view body = text.substr(1, text.size() - 2);
    IntList items;
    if (body.empty()) return Value::list(std::move(items));
    std::size_t start = 0;
    while (true) {
      std::size_t comma = body.find(',', start);
      std::string_view item = body.substr(start, comma == std::string_view::npos
                                                     ? std::string_view::npos
                                                     : comma - start);
      // The spaced form puts exactly one space after each comma.
      if (start != 0 && !item.empty() && item.front() == ' ') item.remove_prefix(1);
      items.push_back(parse_int(item));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return Value::list(std::move(items));
  }
  return Value::integer(parse_int(text));
}

}  // namespace tracebench
