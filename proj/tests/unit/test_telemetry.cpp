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
#include <random>

#include "cubesim/dsl.hpp"
#include "cubesim/simulation.hpp"
#include "cubesim/telemetry.hpp"

using namespace cubesim;

namespace {

int malformed_line(std::string_view text) {
  try {
    read_csv(text);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::MalformedCsv);
    return e.pos().line;
  }
  FAIL("expected MalformedCsv");
  return 0;
}

std::string random_field(std::mt19937_64 &rng) {
  static const std::vector<std::string> pieces{
      "a", "Z", "0", "17.5", "-3", " ", ",", "\"", "\n", "\r\n", "\r", "space.obsw.SAFE", "true",
      "é", "\xe2\x86\x92", "\t", "''", ""};
  std::string out;
  int n = static_cast<int>(rng() % 5);
  for (int i = 0; i < n; ++i)
    out += pieces[rng() % pieces.size()];
  return out;
}

Trace random_trace(std::mt19937_64 &rng) {
  Trace t;
  std::size_t cols = 1 + rng() % 6;
  t.columns.push_back("time_s");
  for (std::size_t c = 1; c < cols; ++c)
    t.columns.push_back(random_field(rng) + std::to_string(c));
  std::size_t rows = rng() % 8;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row{std::to_string(r + 1)};
    for (std::size_t c = 1; c < cols; ++c)
      row.push_back(random_field(rng));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t column(const Trace &t, const std::string &name) {
  auto it = std::find(t.columns.begin(), t.columns.end(), name);
  REQUIRE(it != t.columns.end());
  return static_cast<std::size_t>(it - t.columns.begin());
}

} // namespace

TEST_CASE("two rows give a three-line file") {
  Trace t{{"time_s", "battery_wh"}, {{"1", "20"}, {"2", "19.9"}}};
  std::string csv = to_csv(t);
  CHECK(csv == "time_s,battery_wh\n1,20\n2,19.9\n");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(read_csv(csv) == t);
}

TEST_CASE("quoting rule") {
  Trace t{{"time_s", "volts, bus", "say \"hi\""}, {{"1", "a\nb", ""}}};
  std::string csv = to_csv(t);
  CHECK(csv == "time_s,\"volts, bus\",\"say \"\"hi\"\"\"\n1,\"a\nb\",\n");
  CHECK(read_csv(csv) == t);
  CHECK(read_csv("time_s,x\r\n1,2\r\n") == Trace{{"time_s", "x"}, {{"1", "2"}}});
  CHECK(read_csv("time_s,x\n1,2") == Trace{{"time_s", "x"}, {{"1", "2"}}});
}

TEST_CASE("malformed input reports its line") {
  CHECK(malformed_line("") == 1);
  CHECK(malformed_line("time_s,a\n1,2\n3\n") == 3);
  CHECK(malformed_line("time_s,a\n1,2,3\n") == 2);
  CHECK(malformed_line("time_s,a\n1,\"open\n2,3\n") == 2);
  CHECK(malformed_line("time_s,a\n1,2\n2,x\"y\n") == 3);
  CHECK(malformed_line("time_s,a\n1,\"q\"x\n") == 2);
  CHECK(malformed_line("time_s,\"multi\nline\"\n1\n") == 3);
}

TEST_CASE("round trip on 1000 fuzzed traces") {
  std::mt19937_64 rng(4180);
  for (int i = 0; i < 1000; ++i) {
    Trace t = random_trace(rng);
    REQUIRE(read_csv(to_csv(t)) == t);
  }
}

TEST_CASE("trace validation") {
  validate_trace({{"time_s", "a"}, {{"2", "x"}, {"4", "y"}}}, 2);
  CHECK_THROWS_AS(validate_trace({{"time_s"}, {{"1"}, {"3"}}}, 1), Error);
  CHECK_THROWS_AS(validate_trace({{"time_s", "a"}, {{"1"}}}, 1), Error);
  CHECK_THROWS_AS(validate_trace({{"t"}, {}}, 1), Error);
  CHECK_THROWS_AS(validate_trace({{"time_s"}, {{"1.5"}}}, 1), Error);
}

TEST_CASE("snapshot formatting") {
  ModelFile m = parse_model(R"(
    var battery.level = 17.5
    var killswitch = false
    var fault_count = 0
    var note = "a,b"
    machine space { initial RUN state RUN { uses obsw } }
    machine obsw { initial DEPLOYMENT state DEPLOYMENT { } }
  )");
  LinkedModel lm = link_model(m);
  SimState s = initialize(lm, m.initial_store(), 1);
  s.clock_s = 3600;
  std::vector<MonitorSpec> specs{{"battery.level", "battery", {}}, {"obsw", "obsw", {}},
                                 {"fault_count", "faults", {}}, {"killswitch", "ks", {}},
                                 {"note", "note", {}}};
  auto probes = resolve_monitors(lm, s.store, specs);
  CHECK(trace_columns(probes) ==
        std::vector<std::string>{"time_s", "battery", "obsw", "faults", "ks", "note"});
  CHECK(snapshot(s, lm, probes) ==
        std::vector<std::string>{"3600", "17.5", "space.obsw.DEPLOYMENT", "0", "false", "a,b"});
  CHECK(snapshot(s, lm, {}) == std::vector<std::string>{"3600"});
  CHECK(trace_columns({}) == std::vector<std::string>{"time_s"});
  CHECK_THROWS_AS(resolve_monitors(lm, s.store, {{"nope", "x", {}}}), Error);

  // Inactive machines render as "path.-".
  ModelFile m2 = parse_model("machine a { initial X state X { on e -> Y uses b } state Y { } }\n"
                             "machine b { initial P state P { } }");
  LinkedModel lm2 = link_model(m2);
  SimState s2 = initialize(lm2, m2.initial_store(), 1);
  auto p2 = resolve_monitors(lm2, s2.store, {{"b", "b", {}}});
  CHECK(snapshot(s2, lm2, p2)[1] == "a.b.P");
  macro_tick(lm2, s2, std::vector<Event>{Event::external("e")});
  CHECK(snapshot(s2, lm2, p2)[1] == "a.b.-");
}

TEST_CASE("reference run: one row per tick, monotone fault_count") {
  ModelFile m = parse_model(reference_model());
  SimConfig cfg = parse_config(mission_config());
  cfg.fault.beta = 1.0;
  cfg.fault.eta_s = 500.0;
  Trace t = run_scenario(m, cfg, 3, 3000, {{0, "launched", {}}});
  CHECK(t.rows.size() == 3000);
  validate_trace(t, 1);
  std::size_t fc = column(t, "fault_count");
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    REQUIRE(std::stod(t.rows[i][fc]) >= std::stod(t.rows[i - 1][fc]));
  CHECK(std::stod(t.rows.back()[fc]) > 0);
  CHECK(read_csv(to_csv(t)) == t);

  std::size_t obsw = column(t, "obsw");
  CHECK(t.rows[1799][obsw] == "model.system.space_segment.service.obc.obsw.BOOT");
  cfg.engine.tick_s = 5;
  Trace coarse = run_scenario(m, cfg, 3, 3000);
  CHECK(coarse.rows.size() == 600);
  validate_trace(coarse, 5);
}

TEST_CASE("same seed gives a byte-identical battery column") {
  ModelFile m = parse_model(reference_model());
  SimConfig cfg = parse_config(mission_config());
  std::vector<Injection> plan{{0, "launched", {}}};
  Trace a = run_scenario(m, cfg, 42, 7200, plan);
  Trace b = run_scenario(m, cfg, 42, 7200, plan);
  std::size_t col = column(a, "battery_wh");
  std::string ca, cb;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ca += a.rows[i][col] + "\n";
    cb += b.rows[i][col] + "\n";
  }
  CHECK(ca == cb);
  CHECK(to_csv(a) == to_csv(b));
}

TEST_CASE("csv file output") {
  Trace t{{"time_s"}, {{"1"}}};
  std::string path = "telemetry_test_out.csv";
  write_csv_file(t, path);
  std::FILE *f = std::fopen(path.c_str(), "rb");
  REQUIRE(f);
  char buf[64] = {};
  std::size_t n = std::fread(buf, 1, sizeof buf, f);
  std::fclose(f);
  std::remove(path.c_str());
  CHECK(std::string(buf, n) == "time_s\n1\n");
  CHECK_THROWS_AS(write_csv_file(t, "/nonexistent-dir/x.csv"), Error);
}
