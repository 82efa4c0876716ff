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

// Explicit product automaton of a linked model, used as a test oracle for the
// engine. Only models whose variables are all boolean and which use no timers,
// periodic actions, time() or rand() are supported. Each automaton edge is one
// external event followed by run-to-completion, i.e. one macro tick.

#include <string>
#include <vector>

#include "cubesim/engine.hpp"

namespace cubesim {

struct FlatConfig {
  std::vector<int> current;  // per linked node, -1 inactive
  std::vector<bool> values;  // boolean variables in store order

  auto operator<=>(const FlatConfig &) const = default;
};

struct FlatAutomaton {
  static constexpr int kError = -1; // the step raised (e.g. livelock)

  std::vector<std::string> alphabet;  // event triggers, sorted
  std::vector<std::string> variables; // boolean variables, store order
  std::vector<FlatConfig> states;     // states[0] is the initial configuration
  std::vector<std::vector<int>> next; // [state][event] -> state or kError

  int find(const FlatConfig &c) const;
};

struct FlattenOptions {
  std::size_t state_cap = 100000;
  std::size_t microstep_cap = 10000;
};

/// Throws OracleUnsupported or StateExplosion.
FlatAutomaton flatten(const LinkedModel &model, const VariableStore &initial,
                      FlattenOptions options = {});

/// Projects an engine state onto the automaton's configuration space.
FlatConfig project(const FlatAutomaton &automaton, const SimState &state);

} // namespace cubesim
