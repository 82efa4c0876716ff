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

// Static machine definitions as produced by the model parser.

#include <optional>
#include <string>
#include <vector>

#include "cubesim/script.hpp"

namespace cubesim {

enum class TriggerKind : std::uint8_t { Event, Timer, Auto };

struct TransitionDef {
  TriggerKind kind = TriggerKind::Event;
  std::string trigger; // event or timer name; empty for Auto
  std::optional<Expr> guard;
  ActionBlock actions;
  std::string target;
  SourcePos pos;

  bool operator==(const TransitionDef &) const = default;
};

struct PeriodicDef {
  std::int64_t interval_s = 0;
  ActionBlock actions;
  SourcePos pos;

  bool operator==(const PeriodicDef &) const = default;
};

struct StateDef {
  std::string name;
  ActionBlock entry_actions;
  ActionBlock exit_actions;
  std::optional<PeriodicDef> periodic;
  std::vector<TransitionDef> transitions;
  std::vector<std::string> submachines;
  SourcePos pos;

  bool operator==(const StateDef &) const = default;
};

/// A monitored quantity: a variable, or the current state of a machine
/// (given by name or dotted path). Which one is decided at link time.
struct MonitorSpec {
  std::string source;
  std::string column;
  SourcePos pos;

  bool operator==(const MonitorSpec &) const = default;
};

struct MachineDef {
  std::string name;
  std::string initial;
  std::vector<StateDef> states;
  std::vector<MonitorSpec> monitors;
  SourcePos pos;

  const StateDef *find_state(std::string_view state) const;
  int state_index(std::string_view state) const;

  bool operator==(const MachineDef &) const = default;
};

struct VarDecl {
  std::string name;
  Value initial;
  SourcePos pos;

  bool operator==(const VarDecl &) const = default;
};

/// Contents of one or more `.fsm` files.
struct ModelFile {
  std::vector<VarDecl> vars;
  std::vector<MachineDef> machines;
  std::vector<MonitorSpec> monitors;

  /// Appends another file's definitions (used for repeated --model).
  void merge(ModelFile other);
  VariableStore initial_store() const;
  /// Machines not nested by any state, in declaration order.
  std::vector<std::string> root_names() const;

  bool operator==(const ModelFile &) const = default;
};

} // namespace cubesim
