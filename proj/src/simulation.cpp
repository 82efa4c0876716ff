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

#include "cubesim/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace cubesim {

// --- Config ------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string &key, const std::string &value) {
  throw Error(ErrorCode::ConfigError, "bad value for " + key + ": '" + value + "'");
}

double to_double(const std::string &key, const std::string &value) {
  // Accept simple fractions such as "1/3".
  auto slash = value.find('/');
  if (slash != std::string::npos)
    return to_double(key, trim(value.substr(0, slash))) / to_double(key, trim(value.substr(slash + 1)));
  double x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(x))
    bad_value(key, value);
  return x;
}

std::int64_t to_int(const std::string &key, const std::string &value) {
  std::int64_t x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(key, value);
  return x;
}

std::uint64_t to_uint(const std::string &key, const std::string &value) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(key, value);
  return x;
}

bool to_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "no")
    return false;
  bad_value(key, value);
}

std::vector<PassWindow> to_passes(const std::string &key, const std::string &value) {
  std::vector<PassWindow> out;
  if (value == "none" || value.empty())
    return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    auto colon = item.find(':');
    if (colon == std::string::npos)
      bad_value(key, value);
    out.push_back({to_int(key, trim(item.substr(0, colon))), to_int(key, trim(item.substr(colon + 1)))});
  }
  return out;
}

} // namespace

void SimConfig::set(const std::string &key, const std::string &value) {
  if (key == "sim.tick") {
    engine.tick_s = to_int(key, value);
  } else if (key == "sim.microstep_cap") {
    engine.microstep_cap = static_cast<std::size_t>(to_uint(key, value));
  } else if (key == "orbit.period") {
    orbit.period_s = to_int(key, value);
  } else if (key == "orbit.eclipse_fraction") {
    orbit.eclipse_fraction = to_double(key, value);
  } else if (key == "orbit.passes") {
    orbit.passes = to_passes(key, value);
  } else if (key == "power.capacity") {
    power.capacity_wh = to_double(key, value);
  } else if (key == "power.generation") {
    power.generation_w = to_double(key, value);
  } else if (key.rfind("power.load.", 0) == 0 && key.size() > 11) {
    power.loads_w[key.substr(11)] = to_double(key, value);
  } else if (key == "power.disconnect_var") {
    disconnect_var = value;
  } else if (key == "fault.enabled") {
    fault.enabled = to_bool(key, value);
  } else if (key == "fault.beta") {
    fault.beta = to_double(key, value);
  } else if (key == "fault.eta") {
    fault.eta_s = to_double(key, value);
  } else if (key == "fault.seed") {
    fault.seed = to_uint(key, value);
    fault_seed_set = true;
  } else if (key == "fault.paper_literal_rule") {
    fault.literal_rule = to_bool(key, value);
  } else if (key.rfind("init.", 0) == 0 && key.size() > 5) {
    auto v = parse_value_literal(value, true);
    init.emplace_back(key.substr(5), *v);
  } else {
    throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
}

void SimConfig::validate() const {
  if (engine.tick_s <= 0)
    throw Error(ErrorCode::ConfigError, "sim.tick must be positive");
  if (engine.microstep_cap == 0)
    throw Error(ErrorCode::ConfigError, "sim.microstep_cap must be positive");
  orbit.validate();
  power.validate();
  fault.validate();
}

SimConfig parse_config(std::string_view text, SimConfig base) {
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
    ++line_no;
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    std::string l = trim(line);
    if (l.empty())
      continue;
    auto eq = l.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "expected key = value", {line_no, 0});
    try {
      base.set(trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
    } catch (const Error &e) {
      throw Error(e.code(), e.detail(), {line_no, 0});
    }
  }
  return base;
}

// --- Simulation ----------------------------------------------------------------

namespace {

constexpr std::string_view kBatteryVar = "battery.level";
constexpr std::string_view kLoadVar = "power.load_w";
constexpr std::string_view kFaultCountVar = "fault_count";
constexpr std::string_view kReliabilityVar = "reliability";

bool is_number_var(const VariableStore &store, std::string_view name) {
  return store.contains(name) && type_of(store.get(name)) == ValueType::Number;
}

std::vector<MonitorSpec> all_monitors(const ModelFile &model, std::vector<MonitorSpec> extra) {
  std::vector<MonitorSpec> out = model.monitors;
  for (auto &m : extra)
    out.push_back(std::move(m));
  return out;
}

} // namespace

Simulation::Simulation(const ModelFile &model, SimConfig config, std::uint64_t seed,
                       std::vector<MonitorSpec> extra_monitors)
    : model_(link_model(model.machines, model.root_names(),
                        all_monitors(model, std::move(extra_monitors)))),
      config_(std::move(config)) {
  config_.validate();

  VariableStore store = model.initial_store();
  for (const auto &[name, value] : config_.init) {
    Value v = value;
    if (!store.contains(name))
      throw Error(ErrorCode::ConfigError, "init." + name + ": variable is not declared");
    // Bare config text may spell a number or boolean for a text variable.
    if (type_of(store.get(name)) == ValueType::Text && type_of(v) != ValueType::Text)
      v = format_value(v);
    try {
      store.set(name, std::move(v));
    } catch (const Error &e) {
      throw Error(ErrorCode::ConfigError, "init." + name + ": " + e.detail());
    }
  }

  battery_ = is_number_var(store, kBatteryVar);
  if (battery_) {
    double level = std::get<double>(store.get(kBatteryVar));
    if (!(level >= 0 && level <= config_.power.capacity_wh))
      throw Error(ErrorCode::ConfigError, "battery.level must start within [0, power.capacity]");
  }

  fault_ = config_.fault;
  fault_.fault_count = 0;
  fault_rng_.seed(config_.fault_seed_set ? config_.fault.seed : seed ^ 0x9E3779B97F4A7C15ULL);
  if (fault_.enabled) {
    if (!store.contains(kFaultCountVar))
      store.declare(std::string(kFaultCountVar), 0.0);
    if (!store.contains(kReliabilityVar))
      store.declare(std::string(kReliabilityVar), 1.0);
    if (!is_number_var(store, kFaultCountVar) || !is_number_var(store, kReliabilityVar))
      throw Error(ErrorCode::ConfigError, "fault_count and reliability must be numbers");
  }

  try {
    probes_ = resolve_monitors(model_, store, model_.monitors);
  } catch (const Error &e) {
    throw Error(ErrorCode::ConfigError, e.detail(), e.pos());
  }
  state_ = initialize(model_, std::move(store), seed, config_.engine, &startup_);
  TickReport env = settle(model_, state_, environment_events(0, config_.engine.tick_s, config_.orbit));
  startup_.events.insert(startup_.events.end(), env.events.begin(), env.events.end());
  startup_.fired.insert(startup_.fired.end(), env.fired.begin(), env.fired.end());
  last_.clock_s = state_.clock_s;
  last_.sun = config_.orbit.in_sun(state_.clock_s);
  if (battery_) {
    last_.level_before_wh = last_.level_after_wh = std::get<double>(state_.store.get(kBatteryVar));
    last_.battery_connected = battery_connected();
  }
}

double Simulation::active_load_w() const {
  double total = 0.0;
  for (const auto &[name, watts] : config_.power.loads_w) {
    std::string flag = "power." + name;
    if (!state_.store.contains(flag))
      continue;
    const Value &v = state_.store.get(flag);
    if (const bool *on = std::get_if<bool>(&v); on && *on)
      total += watts;
  }
  return total;
}

bool Simulation::battery_connected() const {
  if (config_.disconnect_var.empty() || !state_.store.contains(config_.disconnect_var))
    return true;
  const Value &v = state_.store.get(config_.disconnect_var);
  const bool *isolated = std::get_if<bool>(&v);
  return !(isolated && *isolated);
}

TickReport Simulation::deliver(const std::vector<Event> &events) {
  return settle(model_, state_, events);
}

TickReport Simulation::step(const std::vector<Event> &external) {
  const std::int64_t t0 = state_.clock_s;
  const std::int64_t dt = config_.engine.tick_s;

  TickInfo info;
  info.clock_s = t0 + dt;
  info.sun = config_.orbit.in_sun(t0);
  if (battery_) {
    info.battery_connected = battery_connected();
    info.load_w = info.battery_connected ? active_load_w() : 0.0;
    info.level_before_wh = std::get<double>(state_.store.get(kBatteryVar));
    info.level_after_wh = info.battery_connected
                              ? battery_update(info.level_before_wh, info.sun, info.load_w,
                                               static_cast<double>(dt), config_.power)
                              : info.level_before_wh;
    state_.store.set(kBatteryVar, info.level_after_wh);
    if (is_number_var(state_.store, kLoadVar))
      state_.store.set(kLoadVar, info.load_w);
  }
  if (fault_.enabled) {
    info.fault = sample_fault(fault_, static_cast<double>(t0), static_cast<double>(dt), fault_rng_);
    state_.store.set(kFaultCountVar, static_cast<double>(fault_.fault_count));
    state_.store.set(kReliabilityVar,
                     reliability(static_cast<double>(t0 + dt), fault_.beta, fault_.eta_s));
  }

  std::vector<Event> events = environment_events(t0 + dt, dt, config_.orbit);
  events.insert(events.end(), external.begin(), external.end());
  if (info.fault)
    events.push_back(Event::external("fault", t0 + dt));

  TickReport report = macro_tick(model_, state_, events);
  last_ = info;
  return report;
}

Simulation::Checkpoint Simulation::checkpoint() const { return {state_, fault_, fault_rng_, last_}; }

void Simulation::restore(const Checkpoint &cp) {
  state_ = cp.state;
  fault_ = cp.fault;
  fault_rng_ = cp.fault_rng;
  last_ = cp.last;
}

// --- Scenario runs -------------------------------------------------------------

namespace {

std::vector<Event> injections_at(const std::vector<Injection> &injections, std::int64_t t) {
  std::vector<Event> out;
  for (const auto &i : injections)
    if (i.at_s == t)
      out.push_back(Event::external(i.event, t));
  return out;
}

} // namespace

Trace run_scenario(const ModelFile &model, const SimConfig &config, std::uint64_t seed,
                   std::int64_t duration_s, const std::vector<Injection> &injections,
                   const std::vector<MonitorSpec> &extra_monitors, std::vector<TickInfo> *ticks,
                   std::vector<TickReport> *reports) {
  if (duration_s < 0)
    throw Error(ErrorCode::ConfigError, "duration must be non-negative");
  Simulation sim(model, config, seed, extra_monitors);
  Trace trace;
  trace.columns = sim.columns();
  TickReport zero = sim.deliver(injections_at(injections, 0));
  if (reports) {
    TickReport start = sim.startup();
    start.events.insert(start.events.end(), zero.events.begin(), zero.events.end());
    start.fired.insert(start.fired.end(), zero.fired.begin(), zero.fired.end());
    reports->push_back(std::move(start));
  }
  const std::int64_t tick = config.engine.tick_s;
  const std::int64_t n = duration_s / tick;
  trace.rows.reserve(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    TickReport r = sim.step(injections_at(injections, sim.clock_s() + tick));
    trace.rows.push_back(sim.snapshot_row());
    if (ticks)
      ticks->push_back(sim.last_tick());
    if (reports)
      reports->push_back(std::move(r));
  }
  return trace;
}

// --- Plan validation -----------------------------------------------------------

std::string_view to_string(Verdict::Status s) {
  switch (s) {
  case Verdict::Status::Accepted: return "ACCEPTED";
  case Verdict::Status::Rejected: return "REJECTED";
  case Verdict::Status::Error: return "ERROR";
  }
  return "?";
}

int Verdict::exit_code() const {
  switch (status) {
  case Status::Accepted: return 0;
  case Status::Rejected: return 1;
  case Status::Error: return error_exit;
  }
  return 3;
}

std::string Verdict::report() const {
  std::ostringstream out;
  out << "plan " << plan << ": " << to_string(status) << '\n';
  if (status == Status::Error)
    out << "error: " << error << '\n';
  out << "ticks run: " << ticks_run << '\n';
  out << "faults injected: " << faults_injected << '\n';
  if (!violations.empty()) {
    const auto &v = violations.front();
    out << "first violation: t=" << v.time_s << " " << v.assertion << " (observed " << v.observed
        << ")\n";
    for (const auto &w : violations)
      out << "  violation t=" << w.time_s << ": " << w.assertion << " (observed " << w.observed
          << ")\n";
  }
  return out.str();
}

std::string Verdict::record() const {
  std::ostringstream out;
  out << "verdict status=" << to_string(status) << " plan=" << plan
      << " violations=" << violations.size() << " first_violation_s="
      << (violations.empty() ? std::string("-") : std::to_string(violations.front().time_s))
      << " ticks=" << ticks_run << " faults=" << faults_injected
      << " exit=" << exit_code();
  return out.str();
}

Verdict validate_plan(const ModelFile &model, const PlanFile &plan, const SimConfig &config,
                      std::uint64_t seed) {
  Verdict v;
  v.plan = plan.name;
  std::optional<Simulation> sim;
  try {
    sim.emplace(model, config, seed);
    struct Pending {
      bool failed = false;
      bool satisfied = false;
    };
    std::vector<Pending> track(plan.assertions.size());
    std::vector<std::pair<std::size_t, Violation>> found;

    auto check = [&](std::int64_t t) {
      for (std::size_t i = 0; i < plan.assertions.size(); ++i) {
        const auto &a = plan.assertions[i];
        auto &p = track[i];
        if (p.failed || p.satisfied)
          continue;
        bool relevant = a.kind == Assertion::Kind::Always ||
                        (a.kind == Assertion::Kind::At && t == a.t1_s) ||
                        (a.kind == Assertion::Kind::EventuallyWithin && t >= a.t1_s && t <= a.t2_s);
        if (!relevant)
          continue;
        Value val = evaluate(sim->model(), sim->state(), a.predicate);
        const bool *b = std::get_if<bool>(&val);
        if (!b)
          throw Error(ErrorCode::GuardTypeError,
                      "assertion '" + print_assertion(a) + "' is not boolean", a.pos);
        if (a.kind == Assertion::Kind::EventuallyWithin) {
          if (*b)
            p.satisfied = true;
          else if (t == a.t2_s)
            p.failed = true;
        } else if (!*b) {
          p.failed = true;
        } else if (a.kind == Assertion::Kind::At) {
          p.satisfied = true;
        }
        if (p.failed)
          found.push_back({i, {print_assertion(a), t, format_value(val)}});
      }
    };

    sim->deliver(injections_at(plan.injections, 0));
    check(0);
    const std::int64_t horizon = plan.horizon_s();
    const std::int64_t tick = config.engine.tick_s;
    while (sim->clock_s() + tick <= horizon) {
      sim->step(injections_at(plan.injections, sim->clock_s() + tick));
      ++v.ticks_run;
      check(sim->clock_s());
    }
    std::stable_sort(found.begin(), found.end(), [](const auto &a, const auto &b) {
      if (a.second.time_s != b.second.time_s)
        return a.second.time_s < b.second.time_s;
      return a.first < b.first;
    });
    for (auto &f : found)
      v.violations.push_back(std::move(f.second));
    v.status = v.violations.empty() ? Verdict::Status::Accepted : Verdict::Status::Rejected;
  } catch (const Error &e) {
    v.status = Verdict::Status::Error;
    v.error = e.what();
    v.error_exit = is_definition_error(e.code()) ? 2 : 3;
    v.violations.clear();
  }
  if (sim)
    v.faults_injected = sim->fault_count();
  return v;
}

// --- Debugger --------------------------------------------------------------------

DebugRepl::DebugRepl(Simulation &sim, const std::vector<Injection> *injections)
    : sim_(sim), injections_(injections) {}

std::string DebugRepl::help() {
  return "commands:\n"
         "  step [n]                 advance n ticks (default 1)\n"
         "  emit <event>             deliver an event now\n"
         "  get <var>                print a variable\n"
         "  set <var> <value>        assign a variable\n"
         "  states                   print the active configuration and variables\n"
         "  break <machine> <state>  stop when the machine enters the state\n"
         "  continue                 run until a breakpoint is hit\n"
         "  quit                     leave the session\n";
}

std::string DebugRepl::echo(const std::vector<FiredTransition> &fired) const {
  std::string out;
  for (const auto &f : fired) {
    out += "  t=" + std::to_string(f.at_s) + " " + f.machine + ": ";
    out += (f.from.empty() ? std::string("(enter)") : f.from) + " -> " + f.to + " [" + f.trigger + "]\n";
  }
  return out;
}

std::string DebugRepl::tick_once(std::vector<FiredTransition> &fired) {
  auto cp = sim_.checkpoint();
  try {
    std::vector<Event> ext;
    if (injections_)
      ext = injections_at(*injections_, sim_.clock_s() + sim_.config().engine.tick_s);
    TickReport r = sim_.step(ext);
    fired.insert(fired.end(), r.fired.begin(), r.fired.end());
    return {};
  } catch (const Error &e) {
    sim_.restore(cp);
    return std::string("error: ") + e.what() + "\n";
  }
}

bool DebugRepl::breakpoint_hit(const std::vector<FiredTransition> &fired, std::string *which) const {
  for (const auto &f : fired)
    for (const auto &[node, state] : breakpoints_) {
      const auto &n = sim_.model().nodes[static_cast<std::size_t>(node)];
      if (f.machine == n.path && f.to == n.def.states[static_cast<std::size_t>(state)].name) {
        *which = n.path + " " + f.to;
        return true;
      }
    }
  return false;
}

DebugRepl::Result DebugRepl::execute(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string cmd;
  in >> cmd;
  std::vector<std::string> args;
  for (std::string a; in >> a;)
    args.push_back(a);

  Result res;
  std::string &out = res.output;
  std::vector<FiredTransition> fired;
  auto clock_line = [&] { return "clock=" + std::to_string(sim_.clock_s()) + "\n"; };

  if (cmd.empty()) {
    out = clock_line();
    return res;
  }
  if (cmd == "quit" || cmd == "exit" || cmd == "q") {
    res.quit = true;
    out = clock_line();
    return res;
  }
  if (cmd == "help") {
    out = help();
    return res;
  }

  if (cmd == "step" || cmd == "s") {
    std::int64_t n = 1;
    if (!args.empty()) {
      auto [ptr, ec] = std::from_chars(args[0].data(), args[0].data() + args[0].size(), n);
      if (ec != std::errc() || n < 0 || ptr != args[0].data() + args[0].size()) {
        out = "error: step count must be a non-negative integer\n" + clock_line();
        return res;
      }
    }
    for (std::int64_t i = 0; i < n; ++i) {
      std::string err = tick_once(fired);
      if (!err.empty()) {
        out += err;
        break;
      }
      std::string which;
      if (breakpoint_hit(fired, &which)) {
        out += "breakpoint: " + which + "\n";
        break;
      }
    }
  } else if (cmd == "continue" || cmd == "c") {
    if (breakpoints_.empty()) {
      out = "error: no breakpoints set\n" + clock_line();
      return res;
    }
    bool hit = false;
    for (std::int64_t i = 0; i < continue_limit_ticks; ++i) {
      std::vector<FiredTransition> one;
      std::string err = tick_once(one);
      fired.insert(fired.end(), one.begin(), one.end());
      if (!err.empty()) {
        out += err;
        hit = true;
        break;
      }
      std::string which;
      if (breakpoint_hit(one, &which)) {
        out += "breakpoint: " + which + "\n";
        hit = true;
        break;
      }
    }
    if (!hit)
      out += "no breakpoint hit within " + std::to_string(continue_limit_ticks) + " ticks\n";
  } else if (cmd == "emit" && args.size() == 1) {
    try {
      auto cp = sim_.checkpoint();
      try {
        TickReport r = sim_.deliver({Event::external(args[0], sim_.clock_s())});
        fired = r.fired;
      } catch (...) {
        sim_.restore(cp);
        throw;
      }
    } catch (const Error &e) {
      out += std::string("error: ") + e.what() + "\n";
    }
  } else if (cmd == "get" && args.size() == 1) {
    try {
      out += args[0] + " = " + format_value(sim_.state().store.get(args[0])) + "\n";
    } catch (const Error &e) {
      out += std::string("error: ") + e.what() + "\n";
    }
  } else if (cmd == "set" && args.size() >= 2) {
    std::string text = args[1];
    for (std::size_t i = 2; i < args.size(); ++i)
      text += " " + args[i];
    try {
      const Value &old = sim_.state().store.get(args[0]);
      bool is_text = type_of(old) == ValueType::Text;
      auto v = parse_value_literal(text, is_text);
      if (!v)
        throw Error(ErrorCode::TypeMismatch, "cannot parse value '" + text + "'");
      if (is_text && type_of(*v) != ValueType::Text)
        v = Value{text};
      sim_.mutable_state().store.set(args[0], *v);
      out += args[0] + " = " + format_value(sim_.state().store.get(args[0])) + "\n";
    } catch (const Error &e) {
      out += std::string("error: ") + e.what() + "\n";
    }
  } else if (cmd == "states" && args.empty()) {
    for (const auto &[path, state] : sim_.state().active_config(sim_.model()))
      out += "  " + path + " = " + state + "\n";
    out += "vars:\n";
    for (const auto &[name, value] : sim_.state().store.entries())
      out += "  " + name + " = " + format_value(value) + "\n";
  } else if (cmd == "break" && args.size() == 2) {
    int node = sim_.model().find_machine(args[0]);
    int state = node < 0 ? -1 : sim_.model().nodes[static_cast<std::size_t>(node)].def.state_index(args[1]);
    if (node < 0)
      out += "error: unknown machine '" + args[0] + "'\n";
    else if (state < 0)
      out += "error: machine '" + args[0] + "' has no state '" + args[1] + "'\n";
    else {
      breakpoints_.emplace_back(node, state);
      out += "breakpoint set: " + sim_.model().nodes[static_cast<std::size_t>(node)].path + " " +
             args[1] + "\n";
    }
  } else {
    out = "unknown command '" + std::string(line) + "'\n" + help() + clock_line();
    return res;
  }

  out += echo(fired);
  out += clock_line();
  return res;
}

} // namespace cubesim
