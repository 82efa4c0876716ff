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

// Concurrent hierarchical state machines over a shared variable store.
//
// Execution is a sequence of macro ticks. Each tick advances the clock by one
// quantum, fires expired timers, appends external events, and then runs to
// completion: queued events are dispatched FIFO (each one broadcast to every
// active machine in pre-order, siblings in declaration order) until the queue
// is empty; periodic state actions run; and AUTO transitions are swept until
// none fires. The microstep count per tick is capped.

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cubesim/model.hpp"

namespace cubesim {

inline constexpr std::string_view kExternalOrigin = "EXTERNAL";

struct Event {
  enum class Kind : std::uint8_t { Signal, Timer };

  std::string name;
  Kind kind = Kind::Signal;
  std::string origin{kExternalOrigin};
  std::int64_t timestamp_s = 0;

  static Event external(std::string name, std::int64_t at_s = 0);

  bool operator==(const Event &) const = default;
};

/// One machine instance in the linked tree. Every machine definition appears
/// at most once, so a machine's name identifies its node.
struct MachineNode {
  MachineDef def;
  std::string path; // dotted names from the root, e.g. "model.system"
  int parent = -1;
  int parent_state = -1;
  int depth = 0;
  std::vector<std::vector<int>> children; // per state index, in `uses` order
};

class LinkedModel {
public:
  /// Nodes in pre-order (parent before children, siblings in declaration order).
  std::vector<MachineNode> nodes;
  std::vector<int> roots;
  std::vector<MonitorSpec> monitors;

  /// Accepts a machine name or its full dotted path. Returns -1 if unknown.
  int find_machine(std::string_view name_or_path) const;
  std::size_t size() const { return nodes.size(); }
};

/// Builds the nesting tree. Throws DuplicateMachine, UnknownSubmachine,
/// NestingCycle or SharedSubmachine (a machine nested in two places).
LinkedModel link_model(std::vector<MachineDef> defs, const std::vector<std::string> &roots,
                       std::vector<MonitorSpec> monitors = {});

/// Convenience: link a parsed model file using its implicit roots.
LinkedModel link_model(const ModelFile &file);

struct Timer {
  std::string name;
  int owner = -1;
  std::int64_t expiry_s = 0;

  bool operator==(const Timer &) const = default;
};

struct EngineOptions {
  std::int64_t tick_s = 1;
  std::size_t microstep_cap = 10000;

  bool operator==(const EngineOptions &) const = default;
};

struct SimState {
  std::int64_t clock_s = 0;
  EngineOptions options;
  std::vector<int> current;               // per node; -1 when inactive
  std::vector<std::int64_t> entered_at_s; // per node; time current state was entered
  VariableStore store;
  std::deque<Event> queue;
  std::vector<Timer> timers;
  std::mt19937_64 rng;

  bool active(int node) const { return current[static_cast<std::size_t>(node)] >= 0; }
  /// Machine path -> state name, for active machines only.
  std::map<std::string, std::string> active_config(const LinkedModel &model) const;
  /// "path.STATE" for the node, or "path.-" when inactive.
  std::string state_path(const LinkedModel &model, int node) const;

  bool operator==(const SimState &) const = default;
};

struct FiredTransition {
  std::string machine; // path
  std::string from;    // empty for activation
  std::string to;
  std::string trigger; // event name, "timer:<name>", "auto", or "activate"
  std::int64_t at_s = 0;

  bool operator==(const FiredTransition &) const = default;
};

struct TickReport {
  std::vector<Event> events; // every event dispatched, in order
  std::vector<FiredTransition> fired;
  std::size_t microsteps = 0;
};

/// Enters every root machine (and nested machines of entered states),
/// outermost first, then drains the event queue.
SimState initialize(const LinkedModel &model, VariableStore initial, std::uint64_t seed,
                    EngineOptions options = {}, TickReport *report = nullptr);

/// Delivers one event to the active machines. Events emitted by actions are
/// queued, not processed.
TickReport dispatch(const LinkedModel &model, SimState &state, const Event &event);

/// Advances the clock by one tick and runs to completion. On error the state
/// is left partially updated; callers that need rollback keep a copy.
TickReport macro_tick(const LinkedModel &model, SimState &state, std::span<const Event> external);

/// Delivers events at the current clock (no time advance) and runs to
/// completion, including AUTO sweeps.
TickReport settle(const LinkedModel &model, SimState &state, std::span<const Event> external);

/// Registers (or replaces) the timer (name, owner). Throws BadDelay unless the
/// delay is a positive multiple of the tick.
void set_timer(const LinkedModel &model, SimState &state, const std::string &name, int owner,
               std::int64_t delay_s);

/// Runs an action block in the context of `node`; returns the events it queued.
std::vector<Event> run_actions(const LinkedModel &model, SimState &state, const ActionBlock &block,
                               int node);

/// Evaluates an expression (e.g. a plan predicate) without changing the
/// state; rand() draws from a copy of the generator.
Value evaluate(const LinkedModel &model, const SimState &state, const Expr &expr);

/// Throws std::logic_error if a configuration invariant is broken: active
/// machines have one state, and nested machines are active iff their parent
/// state is.
void check_consistency(const LinkedModel &model, const SimState &state);

/// Uniform double on [0, 1) with 53 random bits.
double uniform01(std::mt19937_64 &rng);

} // namespace cubesim
