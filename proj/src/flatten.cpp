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

#include "cubesim/flatten.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace cubesim {

namespace {

void require_supported(const LinkedModel &model, const VariableStore &initial) {
  for (const auto &[name, value] : initial.entries())
    if (type_of(value) != ValueType::Boolean)
      throw Error(ErrorCode::OracleUnsupported, "variable '" + name + "' is not boolean");

  auto check_expr = [](const Expr &root) {
    visit_exprs(root, [](const Expr &e) {
      if (e.kind == Expr::Kind::Call && (e.name == "time" || e.name == "rand"))
        throw Error(ErrorCode::OracleUnsupported, e.name + "() is not supported", e.pos);
    });
  };
  auto check_block = [&](const ActionBlock &b) {
    visit_block(b, [&](const Stmt &s) {
      if (s.kind == Stmt::Kind::StartTimer)
        throw Error(ErrorCode::OracleUnsupported, "timers are not supported", s.pos);
      check_expr(s.value);
    });
  };
  for (const auto &n : model.nodes)
    for (const auto &s : n.def.states) {
      if (s.periodic)
        throw Error(ErrorCode::OracleUnsupported, "periodic actions are not supported",
                    s.periodic->pos);
      check_block(s.entry_actions);
      check_block(s.exit_actions);
      for (const auto &t : s.transitions) {
        if (t.kind == TriggerKind::Timer)
          throw Error(ErrorCode::OracleUnsupported, "timer triggers are not supported", t.pos);
        if (t.guard)
          check_expr(*t.guard);
        check_block(t.actions);
      }
    }
}

// A second, deliberately separate interpreter of the execution rules, working
// directly on FlatConfig values.
class FlatStepper {
public:
  FlatStepper(const LinkedModel &model, const std::vector<std::string> &vars, std::size_t cap)
      : model_(model), cap_(cap) {
    for (std::size_t i = 0; i < vars.size(); ++i)
      var_index_.emplace(vars[i], i);
  }

  FlatConfig initial(const std::vector<bool> &values) {
    FlatConfig c;
    c.current.assign(model_.nodes.size(), -1);
    c.values = values;
    steps_ = 0;
    pending_.clear();
    for (int r : model_.roots)
      start_machine(c, r);
    while (!pending_.empty())
      deliver_next(c);
    return c;
  }

  FlatConfig step(FlatConfig c, const std::string &event) {
    steps_ = 0;
    pending_.clear();
    pending_.push_back(event);
    for (;;) {
      while (!pending_.empty())
        deliver_next(c);
      if (!auto_round(c))
        return c;
    }
  }

private:
  const MachineDef &def(int n) const { return model_.nodes[static_cast<std::size_t>(n)].def; }

  void tick_budget() {
    if (++steps_ > cap_)
      throw Error(ErrorCode::LivelockError, "oracle: microstep cap exceeded");
  }

  bool read(const FlatConfig &c, const std::string &name) const {
    auto it = var_index_.find(name);
    if (it == var_index_.end())
      throw Error(ErrorCode::UndeclaredVariable, "undeclared variable '" + name + "'");
    return c.values[it->second];
  }

  Value value_of(const FlatConfig &c, const Expr &e) const {
    switch (e.kind) {
    case Expr::Kind::Literal:
      return e.literal;
    case Expr::Kind::Var:
      return read(c, e.name);
    case Expr::Kind::InState: {
      int n = model_.find_machine(e.name);
      if (n < 0)
        throw Error(ErrorCode::UnknownMachine, "unknown machine '" + e.name + "'");
      int s = def(n).state_index(e.state);
      if (s < 0)
        throw Error(ErrorCode::UnknownMachine, "no state '" + e.state + "'");
      return c.current[static_cast<std::size_t>(n)] == s;
    }
    case Expr::Kind::Unary: {
      Value v = value_of(c, e.args[0]);
      if (e.unary == UnaryOp::Not && std::holds_alternative<bool>(v))
        return !std::get<bool>(v);
      if (e.unary == UnaryOp::Neg && std::holds_alternative<double>(v))
        return -std::get<double>(v);
      throw Error(ErrorCode::TypeMismatch, "oracle: bad unary operand");
    }
    case Expr::Kind::Binary:
      return binary(c, e);
    case Expr::Kind::Call:
      break;
    }
    throw Error(ErrorCode::OracleUnsupported, "oracle: unsupported expression");
  }

  Value binary(const FlatConfig &c, const Expr &e) const {
    if (e.binary == BinaryOp::And || e.binary == BinaryOp::Or) {
      bool stop_on = e.binary == BinaryOp::Or;
      for (const auto &side : e.args) {
        Value v = value_of(c, side);
        if (!std::holds_alternative<bool>(v))
          throw Error(ErrorCode::TypeMismatch, "oracle: logical operand not boolean");
        if (std::get<bool>(v) == stop_on)
          return stop_on;
      }
      return !stop_on;
    }
    Value a = value_of(c, e.args[0]);
    Value b = value_of(c, e.args[1]);
    if (a.index() != b.index())
      throw Error(ErrorCode::TypeMismatch, "oracle: operand types differ");
    if (e.binary == BinaryOp::Eq)
      return a == b;
    if (e.binary == BinaryOp::Ne)
      return a != b;
    throw Error(ErrorCode::OracleUnsupported, "oracle: arithmetic is not supported");
  }

  bool holds(const FlatConfig &c, const TransitionDef &t) const {
    if (!t.guard)
      return true;
    Value v = value_of(c, *t.guard);
    if (!std::holds_alternative<bool>(v))
      throw Error(ErrorCode::GuardTypeError, "oracle: guard not boolean");
    return std::get<bool>(v);
  }

  void perform(FlatConfig &c, const ActionBlock &block) {
    for (const auto &s : block) {
      if (s.kind == Stmt::Kind::Emit) {
        pending_.push_back(s.name);
      } else if (s.kind == Stmt::Kind::Assign) {
        Value v = value_of(c, s.value);
        auto it = var_index_.find(s.name);
        if (it == var_index_.end())
          throw Error(ErrorCode::UndeclaredVariable, "undeclared variable '" + s.name + "'");
        if (!std::holds_alternative<bool>(v))
          throw Error(ErrorCode::TypeMismatch, "oracle: non-boolean assignment");
        c.values[it->second] = std::get<bool>(v);
      } else if (s.kind == Stmt::Kind::If) {
        Value v = value_of(c, s.value);
        if (!std::holds_alternative<bool>(v))
          throw Error(ErrorCode::TypeMismatch, "oracle: if condition not boolean");
        perform(c, std::get<bool>(v) ? s.then_block : s.else_block);
      }
    }
  }

  void start_machine(FlatConfig &c, int n) { put_in_state(c, n, def(n).state_index(def(n).initial)); }

  void put_in_state(FlatConfig &c, int n, int s) {
    c.current[static_cast<std::size_t>(n)] = s;
    just_entered_.insert(n);
    perform(c, def(n).states[static_cast<std::size_t>(s)].entry_actions);
    for (int child : model_.nodes[static_cast<std::size_t>(n)].children[static_cast<std::size_t>(s)])
      start_machine(c, child);
  }

  void take_out_of_state(FlatConfig &c, int n) {
    int s = c.current[static_cast<std::size_t>(n)];
    const auto &kids = model_.nodes[static_cast<std::size_t>(n)].children[static_cast<std::size_t>(s)];
    for (std::size_t k = kids.size(); k-- > 0;) {
      int child = kids[k];
      if (c.current[static_cast<std::size_t>(child)] >= 0) {
        take_out_of_state(c, child);
        c.current[static_cast<std::size_t>(child)] = -1;
      }
    }
    perform(c, def(n).states[static_cast<std::size_t>(s)].exit_actions);
  }

  void take(FlatConfig &c, int n, const TransitionDef &t) {
    take_out_of_state(c, n);
    c.current[static_cast<std::size_t>(n)] = -1;
    perform(c, t.actions);
    put_in_state(c, n, def(n).state_index(t.target));
  }

  // Broadcast of one queued event. Machines entered during this delivery do
  // not see the event.
  void deliver_next(FlatConfig &c) {
    tick_budget();
    std::string ev = pending_.front();
    pending_.pop_front();
    just_entered_.clear();
    for (int n = 0; n < static_cast<int>(model_.nodes.size()); ++n) {
      int s = c.current[static_cast<std::size_t>(n)];
      if (s < 0 || just_entered_.count(n))
        continue;
      const auto &ts = def(n).states[static_cast<std::size_t>(s)].transitions;
      auto hit = std::find_if(ts.begin(), ts.end(), [&](const TransitionDef &t) {
        return t.kind == TriggerKind::Event && t.trigger == ev && holds(c, t);
      });
      if (hit != ts.end())
        take(c, n, *hit);
    }
  }

  bool auto_round(FlatConfig &c) {
    just_entered_.clear();
    bool moved = false;
    for (int n = 0; n < static_cast<int>(model_.nodes.size()); ++n) {
      int s = c.current[static_cast<std::size_t>(n)];
      if (s < 0 || just_entered_.count(n))
        continue;
      const auto &ts = def(n).states[static_cast<std::size_t>(s)].transitions;
      auto hit = std::find_if(ts.begin(), ts.end(), [&](const TransitionDef &t) {
        return t.kind == TriggerKind::Auto && holds(c, t);
      });
      if (hit != ts.end()) {
        tick_budget();
        take(c, n, *hit);
        moved = true;
      }
    }
    return moved;
  }

  const LinkedModel &model_;
  std::size_t cap_;
  std::map<std::string, std::size_t, std::less<>> var_index_;
  std::deque<std::string> pending_;
  std::set<int> just_entered_;
  std::size_t steps_ = 0;
};

} // namespace

int FlatAutomaton::find(const FlatConfig &c) const {
  auto it = std::find(states.begin(), states.end(), c);
  return it == states.end() ? kError : static_cast<int>(it - states.begin());
}

FlatAutomaton flatten(const LinkedModel &model, const VariableStore &initial,
                      FlattenOptions options) {
  require_supported(model, initial);

  FlatAutomaton out;
  std::vector<bool> values;
  for (const auto &[name, value] : initial.entries()) {
    out.variables.push_back(name);
    values.push_back(std::get<bool>(value));
  }
  std::set<std::string> alphabet;
  for (const auto &n : model.nodes)
    for (const auto &s : n.def.states)
      for (const auto &t : s.transitions)
        if (t.kind == TriggerKind::Event)
          alphabet.insert(t.trigger);
  out.alphabet.assign(alphabet.begin(), alphabet.end());

  FlatStepper stepper(model, out.variables, options.microstep_cap);
  std::map<FlatConfig, int> index;
  out.states.push_back(stepper.initial(values));
  index.emplace(out.states[0], 0);

  for (std::size_t i = 0; i < out.states.size(); ++i) {
    std::vector<int> row;
    for (const auto &ev : out.alphabet) {
      int target = FlatAutomaton::kError;
      try {
        FlatConfig succ = stepper.step(out.states[i], ev);
        auto [it, inserted] = index.emplace(succ, static_cast<int>(out.states.size()));
        if (inserted) {
          if (out.states.size() >= options.state_cap)
            throw Error(ErrorCode::StateExplosion,
                        "more than " + std::to_string(options.state_cap) + " configurations");
          out.states.push_back(succ);
        }
        target = it->second;
      } catch (const Error &e) {
        if (e.code() == ErrorCode::StateExplosion)
          throw;
      }
      row.push_back(target);
    }
    out.next.push_back(std::move(row));
  }
  return out;
}

FlatConfig project(const FlatAutomaton &automaton, const SimState &state) {
  FlatConfig c;
  c.current = state.current;
  for (const auto &name : automaton.variables)
    c.values.push_back(std::get<bool>(state.store.get(name)));
  return c;
}

} // namespace cubesim
