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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tracebench {

using Int = std::int64_t;
using IntList = std::vector<Int>;

enum class ValueType { Int, Bool, IntList };

std::string_view to_string(ValueType type);
ValueType value_type_from_string(std::string_view text);

// Type implied by a variable name: `lst_*` lists, `cond_*` booleans,
// everything else an integer.
ValueType type_of_name(std::string_view name);

// A runtime value of the mini-language.
class Value {
 public:
  Value() : data_(Int{0}) {}
  static Value integer(Int v) { return Value(v); }
  static Value boolean(bool v) { return Value(v); }
  static Value list(IntList v) { return Value(std::move(v)); }

  ValueType type() const;
  bool is_int() const { return std::holds_alternative<Int>(data_); }
  bool is_bool() const { return std::holds_alternative<bool>(data_); }
  bool is_list() const { return std::holds_alternative<IntList>(data_); }

  Int as_int() const { return std::get<Int>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const IntList& as_list() const { return std::get<IntList>(data_); }
  IntList& as_list() { return std::get<IntList>(data_); }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(Int v) : data_(v) {}
  explicit Value(bool v) : data_(v) {}
  explicit Value(IntList v) : data_(std::move(v)) {}

  std::variant<Int, bool, IntList> data_;
};

// Compact is the trace form (`[1,2,3]`); Spaced is the call-argument form
// (`[1, 2, 3]`). Scalars render identically in both.
enum class RenderMode { Compact, Spaced };

std::string render_value(const Value& v, RenderMode mode);

// Accepts both compact and spaced list forms. Throws std::invalid_argument.
Value parse_value(std::string_view text);

}  // namespace tracebench
