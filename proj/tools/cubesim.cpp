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

// cubesim command-line interface. Uses only the public C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "cubesim/cubesim.h"

namespace {

struct Options {
  std::vector<std::string> models;
  std::string plan;
  std::string config;
  std::uint64_t seed = 1;
  std::int64_t duration = 7200;
  std::string out;
  std::vector<std::string> monitors;
};

using Session = std::unique_ptr<cubesim_session, decltype(&cubesim_destroy)>;

int exit_for(cubesim_status st) {
  switch (st) {
  case CUBESIM_OK: return 0;
  case CUBESIM_E_RUNTIME: return 3;
  default: return 2;
  }
}

int report(cubesim_session *s, cubesim_status st) {
  std::fprintf(stderr, "cubesim: %s\n", cubesim_last_error(s));
  return exit_for(st);
}

// Loads models, config, monitors and plan. Returns 0 or an exit code.
int prepare(cubesim_session *s, const Options &o, bool want_plan) {
  cubesim_status st = CUBESIM_OK;
  if (o.models.empty()) {
    st = cubesim_load_reference(s);
    if (st != CUBESIM_OK)
      return report(s, st);
  }
  for (const auto &m : o.models)
    if ((st = cubesim_load_model_file(s, m.c_str())) != CUBESIM_OK)
      return report(s, st);
  if (!o.config.empty() && (st = cubesim_load_config_file(s, o.config.c_str())) != CUBESIM_OK)
    return report(s, st);
  for (const auto &m : o.monitors) {
    auto eq = m.find('=');
    std::string source = m.substr(0, eq);
    std::string label = eq == std::string::npos ? source : m.substr(eq + 1);
    if ((st = cubesim_add_monitor(s, source.c_str(), label.c_str())) != CUBESIM_OK)
      return report(s, st);
  }
  if (!o.plan.empty()) {
    st = cubesim_load_plan_file(s, o.plan.c_str());
  } else if (want_plan) {
    if (!o.models.empty()) {
      std::fprintf(stderr, "cubesim: --plan is required with --model\n");
      return 2;
    }
    st = cubesim_load_reference_plan(s);
  }
  if (st != CUBESIM_OK)
    return report(s, st);
  return 0;
}

int cmd_run(cubesim_session *s, const Options &o) {
  if (int rc = prepare(s, o, o.models.empty()))
    return rc;
  if (o.duration < 0) {
    std::fprintf(stderr, "cubesim: --duration must be non-negative\n");
    return 2;
  }
  cubesim_status st = cubesim_start(s, o.seed);
  if (st == CUBESIM_OK)
    st = cubesim_run(s, o.duration);
  if (st != CUBESIM_OK)
    return report(s, st);
  if (o.out.empty() || o.out == "-") {
    std::fputs(cubesim_csv(s), stdout);
  } else if ((st = cubesim_write_csv(s, o.out.c_str())) != CUBESIM_OK) {
    return report(s, st);
  }
  return 0;
}

int cmd_validate(cubesim_session *s, const Options &o) {
  if (int rc = prepare(s, o, true))
    return rc;
  cubesim_verdict v;
  cubesim_status st = cubesim_validate(s, o.seed, &v);
  if (st != CUBESIM_OK)
    return report(s, st);
  std::fputs(cubesim_verdict_report(s), stdout);
  std::fflush(stdout);
  std::fprintf(stderr, "%s\n", cubesim_verdict_record(s));
  return cubesim_verdict_exit_code(s);
}

int cmd_debug(cubesim_session *s, const Options &o) {
  if (int rc = prepare(s, o, false))
    return rc;
  cubesim_status st = cubesim_start(s, o.seed);
  if (st != CUBESIM_OK)
    return report(s, st);
  const bool tty = isatty(STDIN_FILENO);
  if (tty)
    std::printf("cubesim debugger, clock=%lld. Type 'help' for commands.\n",
                static_cast<long long>(cubesim_clock(s)));
  std::string line;
  for (;;) {
    if (tty) {
      std::printf("(cubesim) ");
      std::fflush(stdout);
    }
    if (!std::getline(std::cin, line))
      break;
    int quit = 0;
    std::fputs(cubesim_debug_command(s, line.c_str(), &quit), stdout);
    std::fflush(stdout);
    if (quit)
      break;
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"cubesim: CubeSat state machine simulator"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--model", o.models, "Model file (.fsm), repeatable; default: built-in reference");
    cmd->add_option("--config", o.config, "Configuration file (key = value)");
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--monitor", o.monitors, "Extra telemetry column source=label, repeatable");
  };

  auto *run = app.add_subcommand("run", "Simulate and write telemetry CSV");
  add_common(run);
  run->add_option("--plan", o.plan,
                 "Plan whose injections are delivered; default with the built-in model: launch plan");
  run->add_option("--duration", o.duration, "Simulated seconds")->capture_default_str();
  run->add_option("--out", o.out, "Output CSV path (default: stdout)");

  auto *validate = app.add_subcommand("validate", "Accept or reject an operational plan");
  add_common(validate);
  validate->add_option("--plan", o.plan, "Plan file (.plan); default: built-in launch plan");

  auto *debug = app.add_subcommand("debug", "Interactive step debugger on stdin");
  add_common(debug);
  debug->add_option("--plan", o.plan, "Plan whose injections are delivered while stepping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  Session s(cubesim_create(), &cubesim_destroy);
  if (!s) {
    std::fprintf(stderr, "cubesim: out of memory\n");
    return 3;
  }
  if (*run)
    return cmd_run(s.get(), o);
  if (*validate)
    return cmd_validate(s.get(), o);
  return cmd_debug(s.get(), o);
}
