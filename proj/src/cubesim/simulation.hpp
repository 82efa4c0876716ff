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

// Mission runner: couples the engine with the orbit environment, the battery
// and fault models, plan injections and telemetry. Also plan validation and
// the line-oriented debugger used by the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cubesim/dsl.hpp"
#include "cubesim/engine.hpp"
#include "cubesim/fault.hpp"
#include "cubesim/mission.hpp"
#include "cubesim/telemetry.hpp"

namespace cubesim {

/// Settings read from plain `key = value` files. See README for the key list.
struct SimConfig {
  EngineOptions engine;
  OrbitProfile orbit;
  PowerModel power;
  FaultModel fault;
  bool fault_seed_set = false;
  /// Variable whose `true` value isolates the battery (no charge, no load).
  std::string disconnect_var = "killswitch";
  /// `init.<var>` overrides of declared initial values, in file order.
  std::vector<std::pair<std::string, Value>> init;

  /// Applies one key. Throws ConfigError for unknown keys or bad values.
  void set(const std::string &key, const std::string &value);
  void validate() const;
};

SimConfig parse_config(std::string_view text, SimConfig base = {});

/// Per-tick physics bookkeeping, exposed for analysis and tests.
struct TickInfo {
  std::int64_t clock_s = 0;  // clock after the tick
  bool sun = false;          // illumination over the tick interval
  bool battery_connected = false;
  double load_w = 0.0;
  double level_before_wh = 0.0;
  double level_after_wh = 0.0;
  bool fault = false;
};

class Simulation {
public:
  Simulation(const ModelFile &model, SimConfig config, std::uint64_t seed,
             std::vector<MonitorSpec> extra_monitors = {});

  /// Delivers events at the current clock without advancing time.
  TickReport deliver(const std::vector<Event> &events);
  /// One macro tick: battery and fault update for the interval, then the
  /// engine tick with environment events, `external` and any fault event.
  TickReport step(const std::vector<Event> &external = {});

  std::vector<std::string> columns() const { return trace_columns(probes_); }
  std::vector<std::string> snapshot_row() const { return snapshot(state_, model_, probes_); }

  const LinkedModel &model() const { return model_; }
  const SimState &state() const { return state_; }
  SimState &mutable_state() { return state_; }
  const SimConfig &config() const { return config_; }
  std::int64_t clock_s() const { return state_.clock_s; }
  std::uint64_t fault_count() const { return fault_.fault_count; }
  bool has_battery() const { return battery_; }
  const TickInfo &last_tick() const { return last_; }
  /// Report of the start-up (initial entries and t = 0 environment events).
  const TickReport &startup() const { return startup_; }

  /// Rolls back to a snapshot taken with `checkpoint()`.
  struct Checkpoint;
  Checkpoint checkpoint() const;
  void restore(const Checkpoint &cp);

private:
  double active_load_w() const;
  bool battery_connected() const;

  LinkedModel model_;
  SimConfig config_;
  std::vector<Probe> probes_;
  SimState state_;
  FaultModel fault_;
  std::mt19937_64 fault_rng_;
  bool battery_ = false;
  TickInfo last_;
  TickReport startup_;
};

struct Simulation::Checkpoint {
  SimState state;
  FaultModel fault;
  std::mt19937_64 fault_rng;
  TickInfo last;
};

/// Runs `duration_s / tick` ticks, injecting the plan's events at their
/// times, and returns one row per tick.
Trace run_scenario(const ModelFile &model, const SimConfig &config, std::uint64_t seed,
                   std::int64_t duration_s, const std::vector<Injection> &injections = {},
                   const std::vector<MonitorSpec> &extra_monitors = {},
                   std::vector<TickInfo> *ticks = nullptr,
                   std::vector<TickReport> *reports = nullptr);

struct Violation {
  std::string assertion;
  std::int64_t time_s = 0;
  std::string observed;

  bool operator==(const Violation &) const = default;
};

struct Verdict {
  enum class Status : std::uint8_t { Accepted, Rejected, Error };

  std::string plan;
  Status status = Status::Accepted;
  std::vector<Violation> violations;
  std::int64_t ticks_run = 0;
  std::uint64_t faults_injected = 0;
  std::string error;
  int error_exit = 3;

  /// 0 accepted, 1 rejected, 2 definition error, 3 runtime error.
  int exit_code() const;
  std::string report() const;
  /// Single-line key=value record.
  std::string record() const;
};

std::string_view to_string(Verdict::Status s);

/// Simulates until the plan horizon and checks every assertion. Runtime
/// errors yield status Error rather than an exception.
Verdict validate_plan(const ModelFile &model, const PlanFile &plan, const SimConfig &config,
                      std::uint64_t seed);

/// Line-oriented debugger over a Simulation.
class DebugRepl {
public:
  explicit DebugRepl(Simulation &sim, const std::vector<Injection> *injections = nullptr);

  struct Result {
    std::string output;
    bool quit = false;
  };

  Result execute(std::string_view line);
  static std::string help();

  /// Ticks `continue` may run before giving up.
  std::int64_t continue_limit_ticks = 1000000;

private:
  std::string tick_once(std::vector<FiredTransition> &fired);
  bool breakpoint_hit(const std::vector<FiredTransition> &fired, std::string *which) const;
  std::string echo(const std::vector<FiredTransition> &fired) const;

  Simulation &sim_;
  const std::vector<Injection> *injections_;
  std::vector<std::pair<int, int>> breakpoints_; // (node, state)
};

} // namespace cubesim
