/*
 * Copyright (C) 2026 The cubesim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// The action/guard mini-language: values, the variable store, expression and
// statement trees, and their evaluation against a ScriptEnv.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cubesim/error.hpp"

namespace cubesim {

/// real | boolean | text. No implicit conversions between the three.
using Value = std::variant<double, bool, std::string>;

enum class ValueType : std::uint8_t { Number, Boolean, Text };

ValueType type_of(const Value &v);
std::string_view to_string(ValueType t);

/// Telemetry/REPL rendering: numbers with at most 9 significant digits,
/// booleans as true/false, text verbatim.
std::string format_value(const Value &v);
std::string format_number(double x);

/// Parses `true`, `false`, a decimal number or a double-quoted string.
/// With `bare_text`, anything else is accepted as text.
std::optional<Value> parse_value_literal(std::string_view text, bool bare_text = false);

/// Global variable namespace shared by all machines. Every name must be
/// declared before it is read or written, and keeps its declared type.
class VariableStore {
public:
  using Map = std::map<std::string, Value, std::less<>>;

  void declare(const std::string &name, Value initial, SourcePos pos = {});
  bool contains(std::string_view name) const;
  const Value &get(std::string_view name) const;
  void set(std::string_view name, Value v);

  const Map &entries() const { return vars_; }
  std::size_t size() const { return vars_.size(); }

  bool operator==(const VariableStore &) const = default;

private:
  Map vars_;
};

enum class UnaryOp : std::uint8_t { Neg, Not };
enum class BinaryOp : std::uint8_t {
  Add, Sub, Mul, Div, Mod,
  Lt, Le, Gt, Ge, Eq, Ne,
  And, Or,
};

std::string_view to_string(BinaryOp op);

struct Expr {
  enum class Kind : std::uint8_t { Literal, Var, Unary, Binary, Call, InState };

  Kind kind = Kind::Literal;
  Value literal = 0.0;
  std::string name;  // variable, builtin, or machine path for InState
  std::string state; // InState only
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::vector<Expr> args;
  SourcePos pos;

  static Expr make_literal(Value v, SourcePos pos = {});
  static Expr make_var(std::string name, SourcePos pos = {});
  static Expr make_unary(UnaryOp op, Expr operand, SourcePos pos = {});
  static Expr make_binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos = {});
  static Expr make_call(std::string name, std::vector<Expr> args, SourcePos pos = {});
  static Expr make_in_state(std::string machine, std::string state, SourcePos pos = {});

  bool operator==(const Expr &) const = default;
};

struct Stmt;
using ActionBlock = std::vector<Stmt>;

struct Stmt {
  enum class Kind : std::uint8_t { Assign, Emit, StartTimer, If };

  Kind kind = Kind::Emit;
  std::string name; // assigned variable, emitted event or timer name
  Expr value;       // assignment value, timer delay or if-condition
  ActionBlock then_block;
  ActionBlock else_block;
  SourcePos pos;

  static Stmt make_assign(std::string var, Expr value, SourcePos pos = {});
  static Stmt make_emit(std::string event, SourcePos pos = {});
  static Stmt make_start_timer(std::string timer, Expr delay, SourcePos pos = {});
  static Stmt make_if(Expr cond, ActionBlock then_block, ActionBlock else_block,
                      SourcePos pos = {});

  bool operator==(const Stmt &) const = default;
};

struct Builtin {
  std::string_view name;
  int arity;
  bool pure;
};

/// The closed builtin set: exp, pow, clamp, min, max, abs, time, rand.
std::span<const Builtin> builtins();
const Builtin *find_builtin(std::string_view name);

/// Everything a script can observe or affect outside its own evaluation.
class ScriptEnv {
public:
  virtual ~ScriptEnv() = default;

  virtual const Value &read(std::string_view var) const = 0;
  virtual void write(std::string_view var, Value v) = 0;
  /// Current simulation clock in seconds.
  virtual double now() const = 0;
  /// Uniform draw on [0, 1) from the simulation's seeded generator.
  virtual double rand() = 0;
  virtual bool in_state(std::string_view machine, std::string_view state) const = 0;
  virtual void emit(const std::string &event) = 0;
  virtual void start_timer(const std::string &timer, double seconds) = 0;
};

Value eval_expr(const Expr &expr, ScriptEnv &env);

/// Evaluates a guard; a non-boolean result is a GuardTypeError.
bool eval_guard(const Expr &guard, ScriptEnv &env);

void exec_actions(const ActionBlock &block, ScriptEnv &env);

/// Visits every expression node in a block (including nested ones).
template <typename Fn> void visit_exprs(const Expr &e, Fn &&fn) {
  fn(e);
  for (const auto &a : e.args)
    visit_exprs(a, fn);
}

template <typename Fn> void visit_block(const ActionBlock &block, Fn &&on_stmt) {
  for (const auto &s : block) {
    on_stmt(s);
    if (s.kind == Stmt::Kind::If) {
      visit_block(s.then_block, on_stmt);
      visit_block(s.else_block, on_stmt);
    }
  }
}

} // namespace cubesim
