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

#include "cubesim/script.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace cubesim {

ValueType type_of(const Value &v) { return static_cast<ValueType>(v.index()); }

std::string_view to_string(ValueType t) {
  switch (t) {
  case ValueType::Number: return "number";
  case ValueType::Boolean: return "boolean";
  case ValueType::Text: return "text";
  }
  return "?";
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string format_value(const Value &v) {
  switch (type_of(v)) {
  case ValueType::Number: return format_number(std::get<double>(v));
  case ValueType::Boolean: return std::get<bool>(v) ? "true" : "false";
  case ValueType::Text: return std::get<std::string>(v);
  }
  return {};
}

std::optional<Value> parse_value_literal(std::string_view text, bool bare_text) {
  if (text == "true")
    return Value{true};
  if (text == "false")
    return Value{false};
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      char c = text[i];
      if (c == '\\' && i + 2 < text.size()) {
        char n = text[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += c;
      }
    }
    return Value{std::move(out)};
  }
  if (!text.empty()) {
    std::string s(text);
    char *end = nullptr;
    double x = std::strtod(s.c_str(), &end);
    bool numeric_start = std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' ||
                         s[0] == '+' || s[0] == '.';
    if (numeric_start && end == s.c_str() + s.size() && std::isfinite(x))
      return Value{x};
  }
  if (bare_text)
    return Value{std::string(text)};
  return std::nullopt;
}

// --- VariableStore -------------------------------------------------------

void VariableStore::declare(const std::string &name, Value initial, SourcePos pos) {
  if (!vars_.emplace(name, std::move(initial)).second)
    throw Error(ErrorCode::DuplicateVar, "variable '" + name + "' declared twice", pos);
}

bool VariableStore::contains(std::string_view name) const { return vars_.find(name) != vars_.end(); }

const Value &VariableStore::get(std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw Error(ErrorCode::UndeclaredVariable, "undeclared variable '" + std::string(name) + "'");
  return it->second;
}

void VariableStore::set(std::string_view name, Value v) {
  auto it = vars_.find(name);
  if (it == vars_.end())
    throw Error(ErrorCode::UndeclaredVariable, "undeclared variable '" + std::string(name) + "'");
  if (it->second.index() != v.index())
    throw Error(ErrorCode::TypeMismatch,
                "variable '" + std::string(name) + "' is " +
                    std::string(to_string(type_of(it->second))) + ", cannot assign " +
                    std::string(to_string(type_of(v))));
  it->second = std::move(v);
}

// --- AST constructors ----------------------------------------------------

Expr Expr::make_literal(Value v, SourcePos pos) {
  Expr e;
  e.kind = Kind::Literal;
  e.literal = std::move(v);
  e.pos = pos;
  return e;
}

Expr Expr::make_var(std::string name, SourcePos pos) {
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(name);
  e.pos = pos;
  return e;
}

Expr Expr::make_unary(UnaryOp op, Expr operand, SourcePos pos) {
  Expr e;
  e.kind = Kind::Unary;
  e.unary = op;
  e.args.push_back(std::move(operand));
  e.pos = pos;
  return e;
}

Expr Expr::make_binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos) {
  Expr e;
  e.kind = Kind::Binary;
  e.binary = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  e.pos = pos;
  return e;
}

Expr Expr::make_call(std::string name, std::vector<Expr> args, SourcePos pos) {
  Expr e;
  e.kind = Kind::Call;
  e.name = std::move(name);
  e.args = std::move(args);
  e.pos = pos;
  return e;
}

Expr Expr::make_in_state(std::string machine, std::string state, SourcePos pos) {
  Expr e;
  e.kind = Kind::InState;
  e.name = std::move(machine);
  e.state = std::move(state);
  e.pos = pos;
  return e;
}

Stmt Stmt::make_assign(std::string var, Expr value, SourcePos pos) {
  Stmt s;
  s.kind = Kind::Assign;
  s.name = std::move(var);
  s.value = std::move(value);
  s.pos = pos;
  return s;
}

Stmt Stmt::make_emit(std::string event, SourcePos pos) {
  Stmt s;
  s.kind = Kind::Emit;
  s.name = std::move(event);
  s.pos = pos;
  return s;
}

Stmt Stmt::make_start_timer(std::string timer, Expr delay, SourcePos pos) {
  Stmt s;
  s.kind = Kind::StartTimer;
  s.name = std::move(timer);
  s.value = std::move(delay);
  s.pos = pos;
  return s;
}

Stmt Stmt::make_if(Expr cond, ActionBlock then_block, ActionBlock else_block, SourcePos pos) {
  Stmt s;
  s.kind = Kind::If;
  s.value = std::move(cond);
  s.then_block = std::move(then_block);
  s.else_block = std::move(else_block);
  s.pos = pos;
  return s;
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
  case BinaryOp::Add: return "+";
  case BinaryOp::Sub: return "-";
  case BinaryOp::Mul: return "*";
  case BinaryOp::Div: return "/";
  case BinaryOp::Mod: return "%";
  case BinaryOp::Lt: return "<";
  case BinaryOp::Le: return "<=";
  case BinaryOp::Gt: return ">";
  case BinaryOp::Ge: return ">=";
  case BinaryOp::Eq: return "==";
  case BinaryOp::Ne: return "!=";
  case BinaryOp::And: return "and";
  case BinaryOp::Or: return "or";
  }
  return "?";
}

// --- Builtins --------------------------------------------------------------

namespace {

constexpr std::array<Builtin, 8> kBuiltins{{
    {"exp", 1, true},
    {"pow", 2, true},
    {"clamp", 3, true},
    {"min", 2, true},
    {"max", 2, true},
    {"abs", 1, true},
    {"time", 0, false},
    {"rand", 0, false},
}};

[[noreturn]] void type_error(const Expr &at, const std::string &what) {
  throw Error(ErrorCode::TypeMismatch, what, at.pos);
}

double as_number(const Value &v, const Expr &at, std::string_view role) {
  if (const double *d = std::get_if<double>(&v))
    return *d;
  type_error(at, std::string(role) + " expects a number, got " +
                     std::string(to_string(type_of(v))));
}

bool as_bool(const Value &v, const Expr &at, std::string_view role) {
  if (const bool *b = std::get_if<bool>(&v))
    return *b;
  type_error(at, std::string(role) + " expects a boolean, got " +
                     std::string(to_string(type_of(v))));
}

Value call_builtin(const Expr &call, ScriptEnv &env) {
  std::vector<double> a;
  a.reserve(call.args.size());
  for (const auto &arg : call.args)
    a.push_back(as_number(eval_expr(arg, env), arg, call.name + "()"));

  const std::string &f = call.name;
  if (f == "exp") return std::exp(a[0]);
  if (f == "pow") return std::pow(a[0], a[1]);
  if (f == "clamp") {
    if (a[1] > a[2])
      throw Error(ErrorCode::TypeMismatch, "clamp() lower bound exceeds upper bound", call.pos);
    return std::clamp(a[0], a[1], a[2]);
  }
  if (f == "min") return std::min(a[0], a[1]);
  if (f == "max") return std::max(a[0], a[1]);
  if (f == "abs") return std::fabs(a[0]);
  if (f == "time") return env.now();
  if (f == "rand") return env.rand();
  throw Error(ErrorCode::SyntaxError, "unknown function '" + f + "'", call.pos);
}

Value eval_binary(const Expr &e, ScriptEnv &env) {
  const Expr &lhs_e = e.args[0];
  const Expr &rhs_e = e.args[1];
  const std::string op(to_string(e.binary));

  if (e.binary == BinaryOp::And || e.binary == BinaryOp::Or) {
    bool l = as_bool(eval_expr(lhs_e, env), lhs_e, "'" + op + "'");
    if (e.binary == BinaryOp::And && !l)
      return false;
    if (e.binary == BinaryOp::Or && l)
      return true;
    return as_bool(eval_expr(rhs_e, env), rhs_e, "'" + op + "'");
  }

  Value lhs = eval_expr(lhs_e, env);
  Value rhs = eval_expr(rhs_e, env);

  if (e.binary == BinaryOp::Eq || e.binary == BinaryOp::Ne) {
    if (lhs.index() != rhs.index())
      type_error(e, "cannot compare " + std::string(to_string(type_of(lhs))) + " with " +
                        std::string(to_string(type_of(rhs))));
    return (lhs == rhs) == (e.binary == BinaryOp::Eq);
  }

  double l = as_number(lhs, lhs_e, "'" + op + "'");
  double r = as_number(rhs, rhs_e, "'" + op + "'");
  switch (e.binary) {
  case BinaryOp::Add: return l + r;
  case BinaryOp::Sub: return l - r;
  case BinaryOp::Mul: return l * r;
  case BinaryOp::Div:
    if (r == 0.0)
      throw Error(ErrorCode::DivisionByZero, "division by zero", e.pos);
    return l / r;
  case BinaryOp::Mod:
    if (r == 0.0)
      throw Error(ErrorCode::DivisionByZero, "modulo by zero", e.pos);
    return std::fmod(l, r);
  case BinaryOp::Lt: return l < r;
  case BinaryOp::Le: return l <= r;
  case BinaryOp::Gt: return l > r;
  case BinaryOp::Ge: return l >= r;
  default: break;
  }
  type_error(e, "bad operator");
}

} // namespace

std::span<const Builtin> builtins() { return kBuiltins; }

const Builtin *find_builtin(std::string_view name) {
  for (const auto &b : kBuiltins)
    if (b.name == name)
      return &b;
  return nullptr;
}

Value eval_expr(const Expr &e, ScriptEnv &env) {
  switch (e.kind) {
  case Expr::Kind::Literal:
    return e.literal;
  case Expr::Kind::Var:
    try {
      return env.read(e.name);
    } catch (const Error &err) {
      throw Error(err.code(), err.detail(), e.pos);
    }
  case Expr::Kind::Unary: {
    Value v = eval_expr(e.args[0], env);
    if (e.unary == UnaryOp::Neg)
      return -as_number(v, e.args[0], "unary '-'");
    return !as_bool(v, e.args[0], "'not'");
  }
  case Expr::Kind::Binary:
    return eval_binary(e, env);
  case Expr::Kind::Call:
    return call_builtin(e, env);
  case Expr::Kind::InState:
    try {
      return env.in_state(e.name, e.state);
    } catch (const Error &err) {
      throw Error(err.code(), err.detail(), e.pos);
    }
  }
  throw Error(ErrorCode::TypeMismatch, "malformed expression", e.pos);
}

bool eval_guard(const Expr &guard, ScriptEnv &env) {
  Value v = eval_expr(guard, env);
  if (const bool *b = std::get_if<bool>(&v))
    return *b;
  throw Error(ErrorCode::GuardTypeError,
              "guard evaluated to " + std::string(to_string(type_of(v))) + ", expected boolean",
              guard.pos);
}

void exec_actions(const ActionBlock &block, ScriptEnv &env) {
  for (const auto &s : block) {
    switch (s.kind) {
    case Stmt::Kind::Assign: {
      Value v = eval_expr(s.value, env);
      try {
        env.write(s.name, std::move(v));
      } catch (const Error &err) {
        throw Error(err.code(), err.detail(), s.pos);
      }
      break;
    }
    case Stmt::Kind::Emit:
      env.emit(s.name);
      break;
    case Stmt::Kind::StartTimer: {
      double seconds = as_number(eval_expr(s.value, env), s.value, "start_timer delay");
      try {
        env.start_timer(s.name, seconds);
      } catch (const Error &err) {
        throw Error(err.code(), err.detail(), s.pos);
      }
      break;
    }
    case Stmt::Kind::If:
      if (as_bool(eval_expr(s.value, env), s.value, "if condition"))
        exec_actions(s.then_block, env);
      else
        exec_actions(s.else_block, env);
      break;
    }
  }
}

} // namespace cubesim
