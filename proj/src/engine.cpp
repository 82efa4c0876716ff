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

#include "cubesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace cubesim {

Event Event::external(std::string name, std::int64_t at_s) {
  Event e;
  e.name = std::move(name);
  e.timestamp_s = at_s;
  return e;
}

double uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// --- Linking -----------------------------------------------------------------

int LinkedModel::find_machine(std::string_view name_or_path) const {
  bool dotted = name_or_path.find('.') != std::string_view::npos;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto &n = nodes[i];
    if (dotted ? n.path == name_or_path : n.def.name == name_or_path)
      return static_cast<int>(i);
  }
  return -1;
}

namespace {

void validate_def(const MachineDef &m) {
  std::set<std::string, std::less<>> names;
  for (const auto &s : m.states)
    if (!names.insert(s.name).second)
      throw Error(ErrorCode::DuplicateState,
                  "state '" + s.name + "' declared twice in machine '" + m.name + "'", s.pos);
  if (!names.count(m.initial))
    throw Error(ErrorCode::SyntaxError,
                "initial state '" + m.initial + "' is not a state of machine '" + m.name + "'",
                m.pos);
  for (const auto &s : m.states)
    for (const auto &t : s.transitions) {
      if (!names.count(t.target))
        throw Error(ErrorCode::SyntaxError,
                    "transition targets undeclared state '" + t.target + "' in machine '" +
                        m.name + "'",
                    t.pos);
      if (t.kind == TriggerKind::Auto && !t.guard)
        throw Error(ErrorCode::SyntaxError,
                    "auto transition without guard in machine '" + m.name + "'", t.pos);
    }
}

} // namespace

LinkedModel link_model(std::vector<MachineDef> defs, const std::vector<std::string> &roots,
                       std::vector<MonitorSpec> monitors) {
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!by_name.emplace(defs[i].name, i).second)
      throw Error(ErrorCode::DuplicateMachine, "machine '" + defs[i].name + "' defined twice",
                  defs[i].pos);
    validate_def(defs[i]);
  }
  for (const auto &m : defs)
    for (const auto &s : m.states)
      for (const auto &sub : s.submachines)
        if (!by_name.count(sub))
          throw Error(ErrorCode::UnknownSubmachine,
                      "state '" + m.name + "." + s.name + "' uses unknown machine '" + sub + "'",
                      s.pos);

  // Cycle detection over the whole nesting relation (white/grey/black DFS).
  std::vector<int> color(defs.size(), 0);
  std::vector<std::string> stack;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    color[i] = 1;
    stack.push_back(defs[i].name);
    for (const auto &s : defs[i].states)
      for (const auto &sub : s.submachines) {
        std::size_t j = by_name.at(sub);
        if (color[j] == 1) {
          std::string path;
          auto from = std::find(stack.begin(), stack.end(), sub);
          for (auto it = from; it != stack.end(); ++it)
            path += *it + " -> ";
          throw Error(ErrorCode::NestingCycle, "nesting cycle " + path + sub, defs[i].pos);
        }
        if (color[j] == 0)
          visit(j);
      }
    stack.pop_back();
    color[i] = 2;
  };
  for (std::size_t i = 0; i < defs.size(); ++i)
    if (color[i] == 0)
      visit(i);

  std::unordered_map<std::string, std::string> nested_in;
  for (const auto &m : defs)
    for (const auto &s : m.states)
      for (const auto &sub : s.submachines) {
        std::string where = m.name + "." + s.name;
        auto [it, fresh] = nested_in.emplace(sub, where);
        if (!fresh)
          throw Error(ErrorCode::SharedSubmachine,
                      "machine '" + sub + "' is nested in both " + it->second + " and " + where,
                      s.pos);
      }

  LinkedModel out;
  std::function<int(std::size_t, const std::string &, int, int, int)> add =
      [&](std::size_t def_index, const std::string &prefix, int parent, int parent_state,
          int depth) -> int {
    int id = static_cast<int>(out.nodes.size());
    MachineNode node;
    node.def = defs[def_index];
    node.path = prefix.empty() ? node.def.name : prefix + "." + node.def.name;
    node.parent = parent;
    node.parent_state = parent_state;
    node.depth = depth;
    node.children.resize(node.def.states.size());
    out.nodes.push_back(std::move(node));
    const MachineDef &def = defs[def_index];
    std::string path = out.nodes[static_cast<std::size_t>(id)].path;
    for (std::size_t s = 0; s < def.states.size(); ++s)
      for (const auto &sub : def.states[s].submachines) {
        int child = add(by_name.at(sub), path, id, static_cast<int>(s), depth + 1);
        out.nodes[static_cast<std::size_t>(id)].children[s].push_back(child);
      }
    return id;
  };

  std::set<std::string, std::less<>> seen_roots;
  for (const auto &r : roots) {
    auto it = by_name.find(r);
    if (it == by_name.end())
      throw Error(ErrorCode::UnknownSubmachine, "unknown root machine '" + r + "'");
    if (nested_in.count(r))
      throw Error(ErrorCode::SharedSubmachine,
                  "root machine '" + r + "' is also nested in " + nested_in.at(r));
    if (!seen_roots.insert(r).second)
      throw Error(ErrorCode::DuplicateMachine, "root machine '" + r + "' listed twice");
    out.roots.push_back(add(it->second, "", -1, -1, 0));
  }

  for (auto &m : monitors)
    out.monitors.push_back(std::move(m));
  for (const auto &n : out.nodes)
    for (const auto &m : n.def.monitors)
      out.monitors.push_back(m);
  std::set<std::string, std::less<>> columns{"time_s"};
  for (const auto &m : out.monitors)
    if (!columns.insert(m.column).second)
      throw Error(ErrorCode::DuplicateMonitor, "monitor column '" + m.column + "' used twice",
                  m.pos);
  return out;
}

LinkedModel link_model(const ModelFile &file) {
  return link_model(file.machines, file.root_names(), file.monitors);
}

// --- SimState helpers ----------------------------------------------------------

std::map<std::string, std::string> SimState::active_config(const LinkedModel &model) const {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < model.nodes.size(); ++i)
    if (current[i] >= 0)
      out[model.nodes[i].path] = model.nodes[i].def.states[static_cast<std::size_t>(current[i])].name;
  return out;
}

std::string SimState::state_path(const LinkedModel &model, int node) const {
  const auto &n = model.nodes[static_cast<std::size_t>(node)];
  int s = current[static_cast<std::size_t>(node)];
  return n.path + "." + (s < 0 ? std::string("-") : n.def.states[static_cast<std::size_t>(s)].name);
}

// --- Execution -------------------------------------------------------------------

namespace {

std::string trigger_label(const TransitionDef &t) {
  switch (t.kind) {
  case TriggerKind::Event: return t.trigger;
  case TriggerKind::Timer: return "timer:" + t.trigger;
  case TriggerKind::Auto: return "auto";
  }
  return {};
}

class Executor {
public:
  Executor(const LinkedModel &model, SimState &state, TickReport &report)
      : model_(model), state_(state), report_(report), fresh_(model.nodes.size(), false) {}

  const MachineNode &node(int i) const { return model_.nodes[static_cast<std::size_t>(i)]; }
  int &current(int i) { return state_.current[static_cast<std::size_t>(i)]; }

  const StateDef &state_def(int i, int s) const {
    return node(i).def.states[static_cast<std::size_t>(s)];
  }

  std::string where(int i, int s) const {
    std::string w = "machine '" + node(i).path + "'";
    if (s >= 0)
      w += " state '" + state_def(i, s).name + "'";
    return w;
  }

  // Runs a block with `i` as the acting machine; errors gain machine/state context.
  void run(const ActionBlock &block, int i, int s);

  void activate(int i) {
    int initial = node(i).def.state_index(node(i).def.initial);
    enter(i, initial, "activate", -1);
  }

  void enter(int i, int s, const std::string &trigger, int from) {
    current(i) = s;
    state_.entered_at_s[static_cast<std::size_t>(i)] = state_.clock_s;
    fresh_[static_cast<std::size_t>(i)] = true;
    report_.fired.push_back({node(i).path, from >= 0 ? state_def(i, from).name : std::string(),
                             state_def(i, s).name, trigger, state_.clock_s});
    run(state_def(i, s).entry_actions, i, s);
    for (int child : node(i).children[static_cast<std::size_t>(s)])
      activate(child);
  }

  // Leaves the current state: nested machines first (innermost, reverse
  // declaration order), then this state's exit actions.
  void leave(int i) {
    int s = current(i);
    const auto &kids = node(i).children[static_cast<std::size_t>(s)];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it)
      deactivate(*it);
    run(state_def(i, s).exit_actions, i, s);
  }

  void deactivate(int i) {
    if (current(i) < 0)
      return;
    leave(i);
    current(i) = -1;
    auto &timers = state_.timers;
    timers.erase(std::remove_if(timers.begin(), timers.end(),
                                [&](const Timer &t) { return t.owner == i; }),
                 timers.end());
  }

  void fire(int i, const TransitionDef &t) {
    int from = current(i);
    last_fired_ = {i, from, &t};
    leave(i);
    current(i) = -1;
    run(t.actions, i, from);
    enter(i, node(i).def.state_index(t.target), trigger_label(t), from);
  }

  bool guard_ok(const TransitionDef &t, int i, int s);

  template <class Describe> void count_microstep(Describe &&step) {
    if (++report_.microsteps <= state_.options.microstep_cap)
      return;
    std::string msg = "livelock: more than " + std::to_string(state_.options.microstep_cap) +
                      " microsteps in one tick at t=" + std::to_string(state_.clock_s) +
                      " (last step: " + step() + ")";
    if (last_fired_.t)
      msg += "; last transition: " + where(last_fired_.node, last_fired_.state) + ", line " +
             std::to_string(last_fired_.t->pos.line);
    throw Error(ErrorCode::LivelockError, msg, last_fired_.t ? last_fired_.t->pos : SourcePos{});
  }

  void dispatch(const Event &ev) {
    std::fill(fresh_.begin(), fresh_.end(), false);
    report_.events.push_back(ev);
    int owner = ev.kind == Event::Kind::Timer ? model_.find_machine(ev.origin) : -1;
    for (int i = 0; i < static_cast<int>(model_.nodes.size()); ++i) {
      if (current(i) < 0 || fresh_[static_cast<std::size_t>(i)])
        continue;
      if (ev.kind == Event::Kind::Timer && i != owner)
        continue;
      TriggerKind want = ev.kind == Event::Kind::Timer ? TriggerKind::Timer : TriggerKind::Event;
      int s = current(i);
      for (const auto &t : state_def(i, s).transitions) {
        if (t.kind != want || t.trigger != ev.name)
          continue;
        if (!guard_ok(t, i, s))
          continue;
        fire(i, t);
        break;
      }
    }
  }

  void drain() {
    while (!state_.queue.empty()) {
      Event ev = std::move(state_.queue.front());
      state_.queue.pop_front();
      count_microstep([&] { return "event '" + ev.name + "' from " + ev.origin; });
      dispatch(ev);
    }
  }

  bool auto_sweep() {
    std::fill(fresh_.begin(), fresh_.end(), false);
    bool any = false;
    for (int i = 0; i < static_cast<int>(model_.nodes.size()); ++i) {
      if (current(i) < 0 || fresh_[static_cast<std::size_t>(i)])
        continue;
      int s = current(i);
      for (const auto &t : state_def(i, s).transitions) {
        if (t.kind != TriggerKind::Auto || !guard_ok(t, i, s))
          continue;
        count_microstep([&] { return "auto transition of " + where(i, s); });
        fire(i, t);
        any = true;
        break;
      }
    }
    return any;
  }

  void run_to_completion() {
    drain();
    while (auto_sweep())
      drain();
  }

  void run_periodic() {
    for (int i = 0; i < static_cast<int>(model_.nodes.size()); ++i) {
      int s = current(i);
      if (s < 0)
        continue;
      const auto &p = state_def(i, s).periodic;
      if (!p)
        continue;
      std::int64_t elapsed = state_.clock_s - state_.entered_at_s[static_cast<std::size_t>(i)];
      if (elapsed > 0 && elapsed % p->interval_s == 0)
        run(p->actions, i, s);
    }
  }

  void fire_timers() {
    auto &timers = state_.timers;
    std::stable_sort(timers.begin(), timers.end(),
                     [](const Timer &a, const Timer &b) { return a.expiry_s < b.expiry_s; });
    auto split = std::find_if(timers.begin(), timers.end(),
                              [&](const Timer &t) { return t.expiry_s > state_.clock_s; });
    for (auto it = timers.begin(); it != split; ++it) {
      Event ev;
      ev.name = it->name;
      ev.kind = Event::Kind::Timer;
      ev.origin = node(it->owner).path;
      ev.timestamp_s = state_.clock_s;
      state_.queue.push_back(std::move(ev));
    }
    timers.erase(timers.begin(), split);
  }

  void append_external(std::span<const Event> external) {
    for (const auto &e : external) {
      if (e.name.empty())
        throw Error(ErrorCode::SyntaxError, "event name must be nonempty");
      Event ev = e;
      ev.timestamp_s = state_.clock_s;
      state_.queue.push_back(std::move(ev));
    }
  }

  const LinkedModel &model_;
  SimState &state_;
  TickReport &report_;
  std::vector<bool> fresh_;
  struct {
    int node = -1;
    int state = -1;
    const TransitionDef *t = nullptr;
  } last_fired_;
};

class ExecEnv : public ScriptEnv {
public:
  ExecEnv(const LinkedModel &model, SimState &state, int node)
      : model_(model), state_(state), node_(node) {}

  const Value &read(std::string_view var) const override { return state_.store.get(var); }
  void write(std::string_view var, Value v) override { state_.store.set(var, std::move(v)); }
  double now() const override { return static_cast<double>(state_.clock_s); }
  double rand() override { return uniform01(state_.rng); }

  bool in_state(std::string_view machine, std::string_view state) const override {
    int i = model_.find_machine(machine);
    if (i < 0)
      throw Error(ErrorCode::UnknownMachine, "unknown machine '" + std::string(machine) + "'");
    const auto &def = model_.nodes[static_cast<std::size_t>(i)].def;
    int s = def.state_index(state);
    if (s < 0)
      throw Error(ErrorCode::UnknownMachine,
                  "machine '" + def.name + "' has no state '" + std::string(state) + "'");
    return state_.current[static_cast<std::size_t>(i)] == s;
  }

  void emit(const std::string &event) override {
    Event ev;
    ev.name = event;
    ev.origin = node_ >= 0 ? model_.nodes[static_cast<std::size_t>(node_)].path
                           : std::string(kExternalOrigin);
    ev.timestamp_s = state_.clock_s;
    state_.queue.push_back(std::move(ev));
  }

  void start_timer(const std::string &timer, double seconds) override {
    if (node_ < 0)
      throw Error(ErrorCode::BadDelay, "timers need an owning machine");
    if (!(seconds > 0) || seconds != std::floor(seconds) || seconds > 9.0e15)
      throw Error(ErrorCode::BadDelay,
                  "timer '" + timer + "' delay must be a positive whole number of seconds, got " +
                      format_number(seconds));
    set_timer(model_, state_, timer, node_, static_cast<std::int64_t>(seconds));
  }

private:
  const LinkedModel &model_;
  SimState &state_;
  int node_;
};

void Executor::run(const ActionBlock &block, int i, int s) {
  if (block.empty())
    return;
  ExecEnv env(model_, state_, i);
  try {
    exec_actions(block, env);
  } catch (const Error &e) {
    throw e.with_context(where(i, s));
  }
}

bool Executor::guard_ok(const TransitionDef &t, int i, int s) {
  if (!t.guard)
    return true;
  ExecEnv env(model_, state_, i);
  try {
    return eval_guard(*t.guard, env);
  } catch (const Error &e) {
    throw e.with_context(where(i, s) + " guard");
  }
}

} // namespace

SimState initialize(const LinkedModel &model, VariableStore initial, std::uint64_t seed,
                    EngineOptions options, TickReport *report) {
  if (options.tick_s <= 0)
    throw Error(ErrorCode::ConfigError, "tick must be a positive number of seconds");
  for (const auto &n : model.nodes)
    for (const auto &s : n.def.states)
      if (s.periodic && (s.periodic->interval_s <= 0 || s.periodic->interval_s % options.tick_s))
        throw Error(ErrorCode::ConfigError,
                    "periodic interval of " + n.path + "." + s.name +
                        " is not a positive multiple of the tick",
                    s.periodic->pos);

  SimState state;
  state.options = options;
  state.current.assign(model.nodes.size(), -1);
  state.entered_at_s.assign(model.nodes.size(), 0);
  state.store = std::move(initial);
  state.rng.seed(seed);

  TickReport local;
  Executor ex(model, state, report ? *report : local);
  for (int root : model.roots)
    ex.activate(root);
  ex.drain();
  return state;
}

TickReport dispatch(const LinkedModel &model, SimState &state, const Event &event) {
  if (event.name.empty())
    throw Error(ErrorCode::SyntaxError, "event name must be nonempty");
  TickReport report;
  Executor ex(model, state, report);
  ex.dispatch(event);
  return report;
}

TickReport macro_tick(const LinkedModel &model, SimState &state, std::span<const Event> external) {
  TickReport report;
  Executor ex(model, state, report);
  state.clock_s += state.options.tick_s;
  ex.fire_timers();
  ex.append_external(external);
  ex.drain();
  ex.run_periodic();
  ex.run_to_completion();
  return report;
}

TickReport settle(const LinkedModel &model, SimState &state, std::span<const Event> external) {
  TickReport report;
  Executor ex(model, state, report);
  ex.append_external(external);
  ex.run_to_completion();
  return report;
}

void set_timer(const LinkedModel &model, SimState &state, const std::string &name, int owner,
               std::int64_t delay_s) {
  if (owner < 0 || owner >= static_cast<int>(model.nodes.size()))
    throw Error(ErrorCode::UnknownMachine, "timer owner out of range");
  if (delay_s <= 0 || delay_s % state.options.tick_s != 0)
    throw Error(ErrorCode::BadDelay,
                "timer '" + name + "' delay " + std::to_string(delay_s) +
                    " s is not a positive multiple of the tick (" +
                    std::to_string(state.options.tick_s) + " s)");
  std::int64_t expiry = state.clock_s + delay_s;
  for (auto &t : state.timers)
    if (t.name == name && t.owner == owner) {
      t.expiry_s = expiry;
      return;
    }
  state.timers.push_back({name, owner, expiry});
}

std::vector<Event> run_actions(const LinkedModel &model, SimState &state, const ActionBlock &block,
                               int node) {
  std::size_t before = state.queue.size();
  ExecEnv env(model, state, node);
  exec_actions(block, env);
  return {state.queue.begin() + static_cast<std::ptrdiff_t>(before), state.queue.end()};
}

Value evaluate(const LinkedModel &model, const SimState &state, const Expr &expr) {
  SimState scratch;
  scratch.clock_s = state.clock_s;
  scratch.options = state.options;
  scratch.current = state.current;
  scratch.rng = state.rng;
  // Only the variables the expression references are copied.
  visit_exprs(expr, [&](const Expr &e) {
    if (e.kind == Expr::Kind::Var && state.store.contains(e.name) && !scratch.store.contains(e.name))
      scratch.store.declare(e.name, state.store.get(e.name));
  });
  ExecEnv env(model, scratch, -1);
  return eval_expr(expr, env);
}

void check_consistency(const LinkedModel &model, const SimState &state) {
  if (state.current.size() != model.nodes.size())
    throw std::logic_error("configuration size mismatch");
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    const auto &n = model.nodes[i];
    int s = state.current[i];
    if (s >= static_cast<int>(n.def.states.size()))
      throw std::logic_error(n.path + ": state index out of range");
    bool should_be_active =
        n.parent < 0 ||
        state.current[static_cast<std::size_t>(n.parent)] == n.parent_state;
    if ((s >= 0) != should_be_active)
      throw std::logic_error(n.path + (s >= 0 ? " active under an inactive parent state"
                                              : " inactive although its parent state is active"));
  }
}

} // namespace cubesim
