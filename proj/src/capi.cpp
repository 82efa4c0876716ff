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

#include "cubesim/cubesim.h"

#include <memory>
#include <optional>
#include <string>

#include "cubesim/simulation.hpp"

using namespace cubesim;

struct cubesim_session {
  ModelFile model;
  bool has_model = false;
  SimConfig config;
  std::vector<MonitorSpec> monitors;
  std::optional<PlanFile> plan;

  std::unique_ptr<Simulation> sim;
  std::unique_ptr<DebugRepl> repl;
  Trace trace;

  std::optional<Verdict> verdict;
  std::string error;
  mutable std::string text; // backing store for returned strings
};

namespace {

cubesim_status status_for(const Error &e) {
  if (e.code() == ErrorCode::IoError)
    return CUBESIM_E_IO;
  return is_definition_error(e.code()) ? CUBESIM_E_DEFINITION : CUBESIM_E_RUNTIME;
}

template <typename Fn> cubesim_status guarded(cubesim_session *s, Fn &&fn) {
  if (!s)
    return CUBESIM_E_ARGUMENT;
  try {
    cubesim_status st = fn();
    if (st == CUBESIM_OK)
      s->error.clear();
    return st;
  } catch (const Error &e) {
    s->error = e.what();
    return status_for(e);
  } catch (const std::exception &e) {
    s->error = e.what();
    return CUBESIM_E_RUNTIME;
  }
}

cubesim_status fail(cubesim_session *s, cubesim_status st, std::string msg) {
  s->error = std::move(msg);
  return st;
}

cubesim_status add_model(cubesim_session *s, std::string_view text) {
  s->model.merge(parse_model(text));
  s->has_model = true;
  s->sim.reset();
  s->repl.reset();
  return CUBESIM_OK;
}

// Errors from a file load are prefixed with the path.
template <typename Fn> cubesim_status from_file(cubesim_session *s, const char *path, Fn &&fn) {
  if (!s)
    return CUBESIM_E_ARGUMENT;
  if (!path)
    return fail(s, CUBESIM_E_ARGUMENT, "null path");
  cubesim_status st = guarded(s, [&] {
    fn(read_text_file(path));
    return CUBESIM_OK;
  });
  if (st != CUBESIM_OK)
    s->error = std::string(path) + ": " + s->error;
  return st;
}

const char *hold(const cubesim_session *s, std::string text) {
  s->text = std::move(text);
  return s->text.c_str();
}

std::vector<Event> due_at(const std::optional<PlanFile> &plan, std::int64_t t) {
  std::vector<Event> out;
  if (plan)
    for (const auto &i : plan->injections)
      if (i.at_s == t)
        out.push_back(Event::external(i.event, t));
  return out;
}

cubesim_status advance(cubesim_session *s, std::int64_t n) {
  if (!s->sim)
    return fail(s, CUBESIM_E_ARGUMENT, "simulation not started");
  if (n < 0)
    return fail(s, CUBESIM_E_ARGUMENT, "tick count must be non-negative");
  const std::int64_t tick = s->config.engine.tick_s;
  for (std::int64_t k = 0; k < n; ++k) {
    s->sim->step(due_at(s->plan, s->sim->clock_s() + tick));
    s->trace.rows.push_back(s->sim->snapshot_row());
  }
  return CUBESIM_OK;
}

} // namespace

extern "C" {

const char *cubesim_version(void) { return "1.0.0"; }

cubesim_session *cubesim_create(void) {
  try {
    return new cubesim_session();
  } catch (...) {
    return nullptr;
  }
}

void cubesim_destroy(cubesim_session *s) { delete s; }

const char *cubesim_last_error(const cubesim_session *s) {
  return s ? s->error.c_str() : "null session";
}

cubesim_status cubesim_load_model_file(cubesim_session *s, const char *path) {
  return from_file(s, path, [&](const std::string &text) { add_model(s, text); });
}

cubesim_status cubesim_load_model_text(cubesim_session *s, const char *text) {
  return guarded(s, [&] {
    if (!text)
      return fail(s, CUBESIM_E_ARGUMENT, "null text");
    return add_model(s, text);
  });
}

cubesim_status cubesim_load_reference(cubesim_session *s) {
  return guarded(s, [&] {
    add_model(s, reference_model());
    s->config = parse_config(mission_config(), s->config);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_load_config_file(cubesim_session *s, const char *path) {
  return from_file(s, path,
                   [&](const std::string &text) { s->config = parse_config(text, s->config); });
}

cubesim_status cubesim_load_config_text(cubesim_session *s, const char *text) {
  return guarded(s, [&] {
    if (!text)
      return fail(s, CUBESIM_E_ARGUMENT, "null text");
    s->config = parse_config(text, s->config);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_set_config(cubesim_session *s, const char *key, const char *value) {
  return guarded(s, [&] {
    if (!key || !value)
      return fail(s, CUBESIM_E_ARGUMENT, "null key or value");
    s->config.set(key, value);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_add_monitor(cubesim_session *s, const char *source, const char *label) {
  return guarded(s, [&] {
    if (!source || !*source)
      return fail(s, CUBESIM_E_ARGUMENT, "empty monitor source");
    s->monitors.push_back({source, label && *label ? label : source, {}});
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_load_plan_file(cubesim_session *s, const char *path) {
  return from_file(s, path, [&](const std::string &text) {
    s->plan = parse_plan(text, s->config.engine.tick_s);
  });
}

cubesim_status cubesim_load_plan_text(cubesim_session *s, const char *text) {
  return guarded(s, [&] {
    if (!text)
      return fail(s, CUBESIM_E_ARGUMENT, "null text");
    s->plan = parse_plan(text, s->config.engine.tick_s);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_load_reference_plan(cubesim_session *s) {
  return guarded(s, [&] {
    s->plan = parse_plan(launch_plan(), s->config.engine.tick_s);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_start(cubesim_session *s, uint64_t seed) {
  return guarded(s, [&] {
    if (!s->has_model)
      return fail(s, CUBESIM_E_ARGUMENT, "no model loaded");
    s->repl.reset();
    s->sim.reset();
    s->trace = {};
    auto sim = std::make_unique<Simulation>(s->model, s->config, seed, s->monitors);
    s->trace.columns = sim->columns();
    s->sim = std::move(sim);
    s->sim->deliver(due_at(s->plan, 0));
    return CUBESIM_OK;
  });
}

int64_t cubesim_clock(const cubesim_session *s) {
  return s && s->sim ? s->sim->clock_s() : 0;
}

cubesim_status cubesim_step(cubesim_session *s, int64_t n) {
  return guarded(s, [&] { return advance(s, n); });
}

cubesim_status cubesim_run(cubesim_session *s, int64_t duration_s) {
  return guarded(s, [&] {
    if (duration_s < 0)
      return fail(s, CUBESIM_E_ARGUMENT, "duration must be non-negative");
    return advance(s, duration_s / s->config.engine.tick_s);
  });
}

size_t cubesim_row_count(const cubesim_session *s) { return s ? s->trace.rows.size() : 0; }

const char *cubesim_csv(cubesim_session *s) {
  if (!s)
    return "";
  return hold(s, to_csv(s->trace));
}

cubesim_status cubesim_write_csv(cubesim_session *s, const char *path) {
  return guarded(s, [&] {
    if (!path)
      return fail(s, CUBESIM_E_ARGUMENT, "null path");
    write_csv_file(s->trace, path);
    return CUBESIM_OK;
  });
}

cubesim_status cubesim_emit(cubesim_session *s, const char *event) {
  return guarded(s, [&] {
    if (!s->sim)
      return fail(s, CUBESIM_E_ARGUMENT, "simulation not started");
    if (!event || !*event)
      return fail(s, CUBESIM_E_ARGUMENT, "empty event name");
    s->sim->deliver({Event::external(event, s->sim->clock_s())});
    return CUBESIM_OK;
  });
}

const char *cubesim_get_var(cubesim_session *s, const char *name) {
  if (!s)
    return nullptr;
  if (!s->sim || !name) {
    s->error = "simulation not started";
    return nullptr;
  }
  try {
    std::string v = format_value(s->sim->state().store.get(name));
    s->error.clear();
    return hold(s, std::move(v));
  } catch (const std::exception &e) {
    s->error = e.what();
    return nullptr;
  }
}

cubesim_status cubesim_set_var(cubesim_session *s, const char *name, const char *value) {
  return guarded(s, [&] {
    if (!s->sim)
      return fail(s, CUBESIM_E_ARGUMENT, "simulation not started");
    if (!name || !value)
      return fail(s, CUBESIM_E_ARGUMENT, "null name or value");
    auto &store = s->sim->mutable_state().store;
    bool is_text = type_of(store.get(name)) == ValueType::Text;
    auto v = parse_value_literal(value, is_text);
    if (!v)
      return fail(s, CUBESIM_E_ARGUMENT, std::string("cannot parse value '") + value + "'");
    if (is_text && type_of(*v) != ValueType::Text)
      v = Value{std::string(value)};
    store.set(name, *v);
    return CUBESIM_OK;
  });
}

const char *cubesim_states(cubesim_session *s) {
  if (!s)
    return "";
  if (!s->sim)
    return hold(s, "");
  std::string out;
  for (const auto &[path, state] : s->sim->state().active_config(s->sim->model()))
    out += path + " = " + state + "\n";
  return hold(s, std::move(out));
}

cubesim_status cubesim_validate(cubesim_session *s, uint64_t seed, cubesim_verdict *verdict) {
  return guarded(s, [&] {
    if (!s->has_model)
      return fail(s, CUBESIM_E_ARGUMENT, "no model loaded");
    if (!s->plan)
      return fail(s, CUBESIM_E_ARGUMENT, "no plan loaded");
    s->verdict = validate_plan(s->model, *s->plan, s->config, seed);
    if (verdict) {
      switch (s->verdict->status) {
      case Verdict::Status::Accepted: *verdict = CUBESIM_ACCEPTED; break;
      case Verdict::Status::Rejected: *verdict = CUBESIM_REJECTED; break;
      case Verdict::Status::Error: *verdict = CUBESIM_VERDICT_ERROR; break;
      }
    }
    return CUBESIM_OK;
  });
}

int cubesim_verdict_exit_code(const cubesim_session *s) {
  return s && s->verdict ? s->verdict->exit_code() : 2;
}

const char *cubesim_verdict_report(const cubesim_session *s) {
  if (!s || !s->verdict)
    return "";
  return hold(s, s->verdict->report());
}

const char *cubesim_verdict_record(const cubesim_session *s) {
  if (!s || !s->verdict)
    return "";
  return hold(s, s->verdict->record());
}

const char *cubesim_debug_command(cubesim_session *s, const char *line, int *quit) {
  if (quit)
    *quit = 0;
  if (!s)
    return "";
  if (!s->sim)
    return hold(s, "error: simulation not started\n");
  if (!s->repl)
    s->repl = std::make_unique<DebugRepl>(*s->sim, s->plan ? &s->plan->injections : nullptr);
  auto r = s->repl->execute(line ? line : "");
  if (quit)
    *quit = r.quit ? 1 : 0;
  return hold(s, std::move(r.output));
}

const char *cubesim_debug_help(void) {
  static const std::string text = DebugRepl::help();
  return text.c_str();
}

} // extern "C"
