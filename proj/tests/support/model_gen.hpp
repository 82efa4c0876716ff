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

// Seeded generator of small boolean-only models for property tests and the
// oracle-equivalence check. Models stay inside the flatten() restriction: no
// numbers, timers, periodic blocks, time() or rand().

#include <random>
#include <string>
#include <vector>

#include "cubesim/dsl.hpp"

namespace cubesim::testing {

struct GenLimits {
  int max_machines = 3;
  int max_states = 4;
  int max_transitions = 3;
  int events = 3;    // a, b, c, ...
  int variables = 2; // p0, p1, ...
  bool nesting = true;
  bool auto_transitions = true;
};

class BoolModelGen {
public:
  explicit BoolModelGen(std::uint64_t seed, GenLimits limits = {})
      : rng_(seed), lim_(limits) {}

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool chance(int percent) { return pick(100) < percent; }

  std::string event() { return std::string(1, static_cast<char>('a' + pick(lim_.events))); }
  std::string var() { return "p" + std::to_string(pick(lim_.variables)); }

  Expr guard(int depth) {
    if (depth <= 0 || chance(40)) {
      if (!machines_.empty() && chance(30)) {
        const auto &[name, nstates] = machines_[static_cast<std::size_t>(pick(static_cast<int>(machines_.size())))];
        return Expr::make_in_state(name, "S" + std::to_string(pick(nstates)));
      }
      if (chance(15))
        return Expr::make_literal(chance(50));
      return Expr::make_var(var());
    }
    switch (pick(3)) {
    case 0: return Expr::make_unary(UnaryOp::Not, guard(depth - 1));
    case 1: return Expr::make_binary(BinaryOp::And, guard(depth - 1), guard(depth - 1));
    default:
      return Expr::make_binary(chance(50) ? BinaryOp::Or : BinaryOp::Eq, guard(depth - 1),
                               guard(depth - 1));
    }
  }

  ActionBlock actions() {
    ActionBlock b;
    int n = pick(3);
    for (int i = 0; i < n; ++i) {
      switch (pick(4)) {
      case 0:
        b.push_back(Stmt::make_emit(event()));
        break;
      case 1:
        b.push_back(Stmt::make_if(guard(1), {Stmt::make_assign(var(), Expr::make_literal(chance(50)))},
                                  {}));
        break;
      default:
        b.push_back(Stmt::make_assign(var(), chance(50) ? Expr::make_literal(chance(50)) : guard(1)));
      }
    }
    return b;
  }

  ModelFile model() {
    ModelFile m;
    machines_.clear();
    for (int v = 0; v < lim_.variables; ++v)
      m.vars.push_back({"p" + std::to_string(v), chance(50), {}});
    int nmachines = 1 + pick(lim_.max_machines);
    std::vector<int> sizes;
    for (int k = 0; k < nmachines; ++k) {
      sizes.push_back(1 + pick(lim_.max_states));
      machines_.emplace_back("m" + std::to_string(k), sizes.back());
    }
    for (int k = 0; k < nmachines; ++k) {
      MachineDef md;
      md.name = "m" + std::to_string(k);
      int nstates = sizes[static_cast<std::size_t>(k)];
      md.initial = "S" + std::to_string(pick(nstates));
      for (int s = 0; s < nstates; ++s) {
        StateDef sd;
        sd.name = "S" + std::to_string(s);
        if (chance(30))
          sd.entry_actions = actions();
        if (chance(20))
          sd.exit_actions = actions();
        int ntr = pick(lim_.max_transitions + 1);
        for (int t = 0; t < ntr; ++t) {
          TransitionDef td;
          if (lim_.auto_transitions && chance(15)) {
            td.kind = TriggerKind::Auto;
            td.guard = guard(2);
          } else {
            td.trigger = event();
            if (chance(50))
              td.guard = guard(2);
          }
          if (chance(50))
            td.actions = actions();
          td.target = "S" + std::to_string(pick(nstates));
          sd.transitions.push_back(std::move(td));
        }
        md.states.push_back(std::move(sd));
      }
      m.machines.push_back(std::move(md));
    }
    // Each later machine may be nested in one state of an earlier machine.
    if (lim_.nesting)
      for (int k = 1; k < nmachines; ++k)
        if (chance(40)) {
          int parent = pick(k);
          auto &states = m.machines[static_cast<std::size_t>(parent)].states;
          states[static_cast<std::size_t>(pick(static_cast<int>(states.size())))]
              .submachines.push_back("m" + std::to_string(k));
        }
    return m;
  }

private:
  std::mt19937_64 rng_;
  GenLimits lim_;
  std::vector<std::pair<std::string, int>> machines_;
};

} // namespace cubesim::testing
