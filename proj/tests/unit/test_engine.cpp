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

#include "doctest.h"

#include <functional>

#include "../support/model_gen.hpp"
#include "cubesim/dsl.hpp"
#include "cubesim/engine.hpp"
#include "cubesim/mission.hpp"

using namespace cubesim;

namespace {

struct Sim {
  ModelFile file;
  LinkedModel model;
  SimState state;

  explicit Sim(std::string_view text, std::uint64_t seed = 1, EngineOptions opts = {})
      : file(parse_model(text)), model(link_model(file)),
        state(initialize(model, file.initial_store(), seed, opts)) {}

  TickReport tick(std::vector<std::string> events = {}) {
    std::vector<Event> ext;
    for (auto &e : events)
      ext.push_back(Event::external(e));
    return macro_tick(model, state, ext);
  }
  std::string at(const std::string &machine) const {
    return state.active_config(model).at(model.nodes[static_cast<std::size_t>(model.find_machine(machine))].path);
  }
  const Value &var(const std::string &name) const { return state.store.get(name); }
  double num(const std::string &name) const { return std::get<double>(var(name)); }
};

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::SyntaxError;
}

MachineDef machine(const std::string &name, std::vector<std::string> uses = {}) {
  MachineDef m;
  m.name = name;
  m.initial = "S";
  StateDef s;
  s.name = "S";
  s.submachines = std::move(uses);
  m.states.push_back(std::move(s));
  return m;
}

} // namespace

TEST_CASE("link: model breakdown tree") {
  LinkedModel lm = link_model({machine("model", {"system", "environment"}), machine("system"),
                               machine("environment")},
                              {"model"});
  REQUIRE(lm.nodes.size() == 3);
  CHECK(lm.roots == std::vector<int>{0});
  CHECK(lm.nodes[0].path == "model");
  CHECK(lm.nodes[0].children[0].size() == 2);
  CHECK(lm.nodes[1].path == "model.system");
  CHECK(lm.nodes[2].path == "model.environment");
  CHECK(lm.nodes[2].parent == 0);
  CHECK(lm.nodes[2].depth == 1);
  CHECK(lm.find_machine("environment") == 2);
  CHECK(lm.find_machine("model.environment") == 2);
  CHECK(lm.find_machine("nope") == -1);
}

TEST_CASE("link: degenerate and broken hierarchies") {
  LinkedModel one = link_model({machine("solo")}, {"solo"});
  CHECK(one.nodes.size() == 1);
  CHECK(one.nodes[0].path == "solo");
  CHECK(code_of([] { link_model({machine("A", {"B"}), machine("B", {"A"})}, {"A"}); }) ==
        ErrorCode::NestingCycle);
  CHECK(code_of([] { link_model({machine("A", {"A"})}, {"A"}); }) == ErrorCode::NestingCycle);
  CHECK(code_of([] { link_model({machine("A", {"B"})}, {"A"}); }) == ErrorCode::UnknownSubmachine);
  CHECK(code_of([] { link_model({machine("A"), machine("A")}, {"A"}); }) ==
        ErrorCode::DuplicateMachine);
  CHECK(code_of([] {
          link_model({machine("A", {"C"}), machine("B", {"C"}), machine("C")}, {"A", "B"});
        }) == ErrorCode::SharedSubmachine);
  // Cycle unreachable from any root is still rejected.
  CHECK(code_of([] {
          link_model({machine("R"), machine("X", {"Y"}), machine("Y", {"X"})}, {"R"});
        }) == ErrorCode::NestingCycle);
}

TEST_CASE("initialize: reference model starts inside the dispenser") {
  Sim sim(reference_model());
  CHECK(sim.at("space") == "IN_DISPENSER");
  CHECK(sim.at("eps") == "OFF");
  CHECK(sim.at("obsw") == "OFF");
  CHECK(sim.at("ants") == "STOWED");
  CHECK(std::get<bool>(sim.var("killswitch")));
  CHECK(sim.state.clock_s == 0);
  CHECK(sim.state.queue.empty());
  check_consistency(sim.model, sim.state);
}

TEST_CASE("initialize: trivial model and determinism") {
  Sim sim("var x = 1\nmachine m { initial A state A { } }");
  CHECK(sim.at("m") == "A");
  CHECK(sim.state.store == sim.file.initial_store());
  Sim a(reference_model(), 5), b(reference_model(), 5);
  CHECK(a.state == b.state);
}

TEST_CASE("initialize: entry order is outermost first, siblings in order") {
  Sim sim(R"(
    var log = 0
    machine root { initial S state S { entry { log = log * 10 + 1 } uses a, b } }
    machine a { initial S state S { entry { log = log * 10 + 2 } uses c } }
    machine b { initial S state S { entry { log = log * 10 + 3 } } }
    machine c { initial S state S { entry { log = log * 10 + 4 } } }
  )");
  CHECK(sim.num("log") == 1243.0);
}

TEST_CASE("dispatch: launched leaves the dispenser") {
  Sim sim(reference_model());
  TickReport r = dispatch(sim.model, sim.state, Event::external("launched"));
  CHECK(sim.at("space") == "IN_ORBIT");
  CHECK_FALSE(std::get<bool>(sim.var("killswitch")));
  REQUIRE(sim.state.queue.size() == 1);
  CHECK(sim.state.queue.front().name == "eps_power_on");
  CHECK(sim.state.queue.front().origin == "model.system.space_segment.space");
  // Not processed recursively within the call.
  CHECK(sim.at("eps") == "OFF");
  REQUIRE(r.fired.size() == 1);
  CHECK(r.fired[0].to == "IN_ORBIT");
}

TEST_CASE("dispatch: unmatched event changes nothing") {
  Sim sim(reference_model());
  SimState before = sim.state;
  dispatch(sim.model, sim.state, Event::external("no_such_event"));
  CHECK(sim.state == before);
}

TEST_CASE("dispatch: first enabled transition in document order wins") {
  Sim sim(R"(
    var which = 0
    machine m {
      initial A
      state A {
        on go [false] / { which = 9 } -> C
        on go / { which = 1 } -> B
        on go / { which = 2 } -> C
      }
      state B { }
      state C { }
    })");
  dispatch(sim.model, sim.state, Event::external("go"));
  CHECK(sim.num("which") == 1.0);
  CHECK(sim.at("m") == "B");
}

TEST_CASE("firing order: exit nested, exit, transition, entry") {
  Sim sim(R"(
    var log = 0
    machine p {
      initial A
      state A {
        uses k1, k2
        exit { log = log * 10 + 3 }
        on go / { log = log * 10 + 4 } -> B
      }
      state B { entry { log = log * 10 + 5 } uses k3 }
    }
    machine k1 { initial S state S { exit { log = log * 10 + 2 } } }
    machine k2 { initial S state S { exit { log = log * 10 + 1 } } }
    machine k3 { initial S state S { entry { log = log * 10 + 6 } } }
  )");
  dispatch(sim.model, sim.state, Event::external("go"));
  CHECK(sim.num("log") == 123456.0);
  CHECK(sim.at("k3") == "S");
  CHECK_FALSE(sim.state.active(sim.model.find_machine("k1")));
  check_consistency(sim.model, sim.state);
}

TEST_CASE("broadcast: one event reaches every active machine; entered machines wait") {
  Sim sim(R"(
    var n = 0
    machine a { initial X state X { on e / { n = n + 1 } -> Y } state Y { on e / { n = n + 100 } -> X } }
    machine b { initial X state X { on e / { n = n + 10 } -> X } }
    machine c { initial X state X { on e -> Y uses d } state Y { } }
    machine d { initial X state X { on e / { n = n + 1000 } -> X } }
  )");
  sim.tick({"e"});
  // a and b fire; c leaves X and deactivates d before d sees the event.
  CHECK(sim.num("n") == 11.0);
  CHECK(sim.at("a") == "Y");
}

TEST_CASE("run to completion: emitted events are processed in the same tick") {
  Sim sim(reference_model());
  sim.tick({"launched"});
  CHECK(sim.at("eps") == "ON");
  CHECK(sim.at("obsw") == "WAIT");
  CHECK(sim.at("ants") == "DEPLOYING");
  CHECK(sim.state.queue.empty());
}

TEST_CASE("macro tick: boot timer fires at exactly 1800 s") {
  Sim sim(reference_model());
  TickReport r0 = settle(sim.model, sim.state, std::vector<Event>{Event::external("launched")});
  CHECK(sim.state.timers.size() == 2);
  for (int t = 1; t < 1800; ++t) {
    sim.tick();
    REQUIRE_MESSAGE(sim.at("obsw") == "WAIT", "t=" << t);
  }
  TickReport r = sim.tick();
  CHECK(sim.state.clock_s == 1800);
  CHECK(sim.at("obsw") == "BOOT");
  bool saw_timer = false;
  for (const auto &e : r.events)
    saw_timer |= e.kind == Event::Kind::Timer && e.name == "boot_wait";
  CHECK(saw_timer);
}

TEST_CASE("macro tick: idle model only advances the clock") {
  Sim sim("var x = 1\nmachine m { initial A state A { on e -> A } }");
  SimState before = sim.state;
  TickReport r = sim.tick();
  CHECK(sim.state.clock_s == 1);
  before.clock_s = 1;
  CHECK(sim.state == before);
  CHECK(r.events.empty());
  CHECK(r.fired.empty());
}

TEST_CASE("macro tick: AUTO ping-pong is a livelock") {
  Sim sim("var go = false\nmachine m { initial A\n state A { on auto [go] -> B }\n state B { on auto [true] -> A } }");
  sim.state.store.set("go", true);
  std::string message;
  try {
    sim.tick();
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::LivelockError);
    message = e.what();
  }
  CHECK(message.find("livelock") != std::string::npos);
}

TEST_CASE("macro tick: event ping-pong is a livelock at a custom cap") {
  EngineOptions opts;
  opts.microstep_cap = 50;
  Sim sim("machine m { initial A state A { on e / { emit e } -> A } }", 1, opts);
  CHECK(code_of([&] { sim.tick({"e"}); }) == ErrorCode::LivelockError);
}

TEST_CASE("macro tick: AUTO transitions sweep after the queue drains") {
  Sim sim(R"(
    var level = 10
    var seen = 0
    machine eps {
      initial ON
      state ON { on auto [level < 6] / { emit low } -> LOW }
      state LOW { on auto [level > 14] -> ON }
    }
    machine obsw { initial N state N { on low / { seen = seen + 1 } -> S } state S { } }
  )");
  sim.tick();
  CHECK(sim.at("eps") == "ON");
  sim.state.store.set("level", 3.0);
  sim.tick();
  CHECK(sim.at("eps") == "LOW");
  CHECK(sim.at("obsw") == "S");
  CHECK(sim.num("seen") == 1.0);
}

TEST_CASE("periodic actions run when the interval divides time in state") {
  Sim sim(R"(
    var n = 0
    machine m {
      initial A
      state A { every 3 { n = n + 1 } on reset -> A }
    })");
  for (int i = 0; i < 9; ++i)
    sim.tick();
  CHECK(sim.num("n") == 3.0);
  sim.tick({"reset"}); // t=10, re-entered
  sim.tick();
  sim.tick();
  CHECK(sim.num("n") == 3.0);
  sim.tick(); // t=13, 3 s after re-entry
  CHECK(sim.num("n") == 4.0);
  EngineOptions opts;
  opts.tick_s = 2;
  CHECK(code_of([&] { Sim bad("machine m { initial A state A { every 3 { } } }", 1, opts); }) ==
        ErrorCode::ConfigError);
}

TEST_CASE("set_timer examples") {
  Sim sim("machine obsw { initial A state A { on timer boot_wait -> B } state B { } }");
  set_timer(sim.model, sim.state, "boot_wait", 0, 1800);
  REQUIRE(sim.state.timers.size() == 1);
  CHECK(sim.state.timers[0].expiry_s == 1800);
  CHECK(code_of([&] { set_timer(sim.model, sim.state, "x", 0, 0); }) == ErrorCode::BadDelay);
  CHECK(code_of([&] { set_timer(sim.model, sim.state, "x", 0, -5); }) == ErrorCode::BadDelay);
  set_timer(sim.model, sim.state, "t", 0, 100);
  set_timer(sim.model, sim.state, "t", 0, 50);
  int count = 0;
  for (const auto &t : sim.state.timers)
    if (t.name == "t") {
      ++count;
      CHECK(t.expiry_s == 50);
    }
  CHECK(count == 1);

  EngineOptions opts;
  opts.tick_s = 10;
  Sim coarse("machine m { initial A state A { } }", 1, opts);
  CHECK(code_of([&] { set_timer(coarse.model, coarse.state, "x", 0, 15); }) == ErrorCode::BadDelay);
  set_timer(coarse.model, coarse.state, "x", 0, 20);
}

TEST_CASE("timers: scripted delays, owner-only delivery, cancellation") {
  Sim sim(R"(
    var hits = 0
    machine a {
      initial A
      state A { on go / { start_timer(t, 5) } -> W }
      state W { on timer t / { hits = hits + 1 } -> A }
    }
    machine b { initial W state W { on timer t / { hits = hits + 100 } -> W } }
    machine c {
      initial P
      state P { uses d on stop -> Q }
      state Q { }
    }
    machine d { initial X state X { entry { start_timer(dt, 3) } on timer dt / { hits = hits + 1000 } -> X } }
  )");
  CHECK(code_of([&] { Sim bad("machine m { initial A state A { entry { start_timer(t, 1.5) } } }"); }) ==
        ErrorCode::BadDelay);
  sim.tick({"go"});
  sim.tick({"stop"}); // d deactivated at t=2, its timer is dropped
  for (int i = 0; i < 10; ++i)
    sim.tick();
  CHECK(sim.num("hits") == 1.0);
  CHECK(sim.state.timers.empty());
}

TEST_CASE("runtime errors name machine and state") {
  Sim sim("var x = 0\nmachine m { initial A state A { on go / { x = 1 / x } -> A } }");
  std::string msg;
  try {
    sim.tick({"go"});
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::DivisionByZero);
    msg = e.what();
  }
  CHECK(msg.find("machine 'm'") != std::string::npos);
  CHECK(msg.find("state 'A'") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);

  Sim guard("var x = 0\nmachine m { initial A state A { on go [x] -> A } }");
  CHECK(code_of([&] { guard.tick({"go"}); }) == ErrorCode::GuardTypeError);
  Sim undeclared("machine m { initial A state A { on go [y] -> A } }");
  CHECK(code_of([&] { undeclared.tick({"go"}); }) == ErrorCode::UndeclaredVariable);
}

TEST_CASE("evaluate leaves the state untouched") {
  Sim sim("var x = 2\nmachine m { initial A state A { } }");
  SimState before = sim.state;
  Value v = evaluate(sim.model, sim.state, parse_expression("rand() + x * 2 + time()"));
  CHECK(std::get<double>(v) >= 4.0);
  CHECK(sim.state == before);
  CHECK(std::get<bool>(evaluate(sim.model, sim.state, parse_expression("in(m, A)"))));
}

TEST_CASE("rand() stream is reproducible for a seed") {
  const char *text = "var r = 0\nvar s = 0\nmachine m { initial A state A { every 1 { r = rand(); s = s + r } } }";
  Sim a(text, 77), b(text, 77), c(text, 78);
  for (int i = 0; i < 100; ++i) {
    a.tick();
    b.tick();
    c.tick();
    REQUIRE(a.num("r") == b.num("r"));
  }
  CHECK(a.num("s") != c.num("s"));
}

TEST_CASE("property: consistency, empty queue and determinism on generated models") {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    testing::BoolModelGen gen(seed);
    ModelFile file = gen.model();
    CAPTURE(print_model(file));
    LinkedModel model = link_model(file);
    SimState s1;
    try {
      s1 = initialize(model, file.initial_store(), seed);
    } catch (const Error &e) {
      REQUIRE(e.code() == ErrorCode::LivelockError);
      continue;
    }
    SimState s2 = s1;
    check_consistency(model, s1);
    std::mt19937_64 rng(seed);
    bool failed = false;
    for (int t = 0; t < 40 && !failed; ++t) {
      std::vector<Event> ext;
      int n = static_cast<int>(rng() % 3);
      for (int k = 0; k < n; ++k)
        ext.push_back(Event::external(std::string(1, static_cast<char>('a' + rng() % 3))));
      try {
        macro_tick(model, s1, ext);
      } catch (const Error &e) {
        REQUIRE(e.code() == ErrorCode::LivelockError);
        CHECK_THROWS_AS(macro_tick(model, s2, ext), Error);
        failed = true;
        break;
      }
      macro_tick(model, s2, ext);
      REQUIRE(s1.queue.empty());
      REQUIRE_NOTHROW(check_consistency(model, s1));
      REQUIRE(s1 == s2);
    }
  }
}

TEST_CASE("property: first-listed enabled transition fires") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 300; ++round) {
    int n = 2 + static_cast<int>(rng() % 5);
    std::vector<bool> enabled(static_cast<std::size_t>(n));
    std::string text = "var which = -1\nmachine m {\n initial A\n state A {\n";
    int first = -1;
    for (int k = 0; k < n; ++k) {
      enabled[static_cast<std::size_t>(k)] = rng() % 2 == 0;
      if (enabled[static_cast<std::size_t>(k)] && first < 0)
        first = k;
      text += "  on go [" + std::string(enabled[static_cast<std::size_t>(k)] ? "true" : "false") +
              "] / { which = " + std::to_string(k) + " } -> B\n";
    }
    text += " }\n state B { }\n}\n";
    Sim sim(text);
    sim.tick({"go"});
    CHECK(sim.num("which") == static_cast<double>(first));
    CHECK(sim.at("m") == (first < 0 ? "A" : "B"));
  }
}

TEST_CASE("property: timers fire once, never before set time plus delay") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 100; ++round) {
    std::int64_t tick = 1 + static_cast<std::int64_t>(rng() % 4);
    std::int64_t delay = tick * (1 + static_cast<std::int64_t>(rng() % 20));
    std::int64_t start_after = static_cast<std::int64_t>(rng() % 10);
    EngineOptions opts;
    opts.tick_s = tick;
    Sim sim("var fired = 0\nvar at = -1\nmachine m { initial A\n"
            " state A { on arm / { start_timer(t, " + std::to_string(delay) + ") } -> A\n"
            "           on timer t / { fired = fired + 1; at = time() } -> A } }",
            1, opts);
    for (std::int64_t i = 0; i < start_after; ++i)
      sim.tick();
    sim.tick({"arm"});
    std::int64_t set_at = sim.state.clock_s;
    for (int i = 0; i < 40; ++i)
      sim.tick();
    CHECK(sim.num("fired") == 1.0);
    CHECK(sim.num("at") == static_cast<double>(set_at + delay));
  }
}
