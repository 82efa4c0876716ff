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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("cubesim_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write(const std::string &name, const std::string &text) {
  fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

Outcome cli(const std::string &args, const std::string &input = "") {
  fs::path in = write("stdin.txt", input);
  fs::path out = scratch() / "stdout.txt";
  fs::path err = scratch() / "stderr.txt";
  std::string cmd = std::string("'") + CUBESIM_CLI + "' " + args + " < '" + in.string() + "' > '" +
                    out.string() + "' 2> '" + err.string() + "'";
  int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

std::string asset(const std::string &name) { return std::string(CUBESIM_SOURCE_DIR) + "/assets/" + name; }

std::vector<std::string> lines(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("validate: shipped launch plan is accepted") {
  Outcome o = cli("validate");
  CHECK(o.code == 0);
  CHECK(o.out.find("ACCEPTED") != std::string::npos);
  CHECK(o.err.find("verdict status=ACCEPTED") != std::string::npos);
  Outcome explicit_files = cli("validate --model " + asset("reference.fsm") + " --config " +
                               asset("mission.cfg") + " --plan " + asset("launch.plan"));
  CHECK(explicit_files.code == 0);
  CHECK(explicit_files.out == o.out);
}

TEST_CASE("validate: NOMINAL at t=100 is rejected at t=100") {
  fs::path plan = write("nominal.plan", "plan early {\n  at 0 emit launched\n  at 100 expect in(obsw, NOMINAL)\n}\n");
  Outcome o = cli("validate --plan " + plan.string());
  CHECK(o.code == 1);
  CHECK(o.out.find("REJECTED") != std::string::npos);
  CHECK(o.out.find("t=100") != std::string::npos);
  CHECK(o.err.find("first_violation_s=100") != std::string::npos);
  CHECK(o.err.find("exit=1") != std::string::npos);
}

TEST_CASE("validate: empty plan is accepted") {
  fs::path plan = write("empty.plan", "plan nothing { }\n");
  CHECK(cli("validate --plan " + plan.string()).code == 0);
}

TEST_CASE("validate twice prints byte-identical reports") {
  Outcome a = cli("validate --seed 17");
  Outcome b = cli("validate --seed 17");
  CHECK(a.code == b.code);
  CHECK(a.out == b.out);
  CHECK(a.err == b.err);
}

TEST_CASE("usage and parse errors exit 2") {
  CHECK(cli("").code == 2);
  CHECK(cli("run --bogus").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("run --seed notanumber").code == 2);
  CHECK(cli("run --model /nonexistent/model.fsm").code == 2);
  fs::path bad = write("bad.fsm", "machine m {\n  initial A\n  state A { on e -> NOWHERE }\n}\n");
  Outcome o = cli("run --model " + bad.string() + " --duration 1");
  CHECK(o.code == 2);
  CHECK(o.err.find("line 3") != std::string::npos);
  fs::path badplan = write("bad.plan", "plan p {\n  at 10 emit a\n  at 5 emit b\n}\n");
  CHECK(cli("validate --plan " + badplan.string()).code == 2);
  CHECK(cli("validate --model " + asset("reference.fsm")).code == 2);
  fs::path badcfg = write("bad.cfg", "orbit.period = -5\n");
  CHECK(cli("run --config " + badcfg.string() + " --duration 1").code == 2);
}

TEST_CASE("runtime errors exit 3") {
  fs::path ll = write("livelock.fsm",
                      "machine m {\n  initial A\n  state A { on go -> B }\n  state B { on auto [true] -> C }\n"
                      "  state C { on auto [true] -> B }\n}\n");
  fs::path go = write("go.plan", "plan go {\n  at 3 emit go\n}\n");
  Outcome o = cli("run --model " + ll.string() + " --plan " + go.string() + " --duration 10");
  CHECK(o.code == 3);
  CHECK(o.err.find("livelock") != std::string::npos);
  CHECK(o.err.find("'m'") != std::string::npos);
  CHECK(o.err.find("line ") != std::string::npos);
  Outcome v = cli("validate --model " + ll.string() + " --plan " + go.string());
  CHECK(v.code == 3);
  CHECK(v.err.find("status=ERROR") != std::string::npos);

  fs::path div = write("div.fsm", "var x = 0\nmachine m {\n  initial A\n  state A { every 2 { x = 1 / x } }\n}\n");
  Outcome d = cli("run --model " + div.string() + " --duration 5");
  CHECK(d.code == 3);
  CHECK(d.err.find("DivisionByZero") != std::string::npos);
  CHECK(d.err.find("line 4") != std::string::npos);
}

TEST_CASE("run: reference scenario boots at exactly 1800 s") {
  Outcome o = cli("run --duration 7200 --seed 1");
  REQUIRE(o.code == 0);
  auto rows = lines(o.out);
  REQUIRE(rows.size() == 7201);
  auto header = rows[0];
  CHECK(header.rfind("time_s,", 0) == 0);
  std::size_t first_boot = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].find("obsw.BOOT") != std::string::npos) {
      first_boot = i;
      break;
    }
  CHECK(first_boot == 1800);
  CHECK(rows[1800].rfind("1800,", 0) == 0);
}

TEST_CASE("run: duration 0 writes the header only") {
  Outcome o = cli("run --duration 0");
  CHECK(o.code == 0);
  CHECK(lines(o.out).size() == 1);
  fs::path out = scratch() / "zero.csv";
  CHECK(cli("run --duration 0 --out " + out.string()).code == 0);
  CHECK(slurp(out) == o.out);
}

TEST_CASE("run: monitors and output file") {
  fs::path out = scratch() / "mon.csv";
  Outcome o = cli("run --duration 20 --monitor killswitch=ks --monitor obsw=\"sw state\" --out " + out.string());
  CHECK(o.code == 0);
  auto rows = lines(slurp(out));
  REQUIRE(rows.size() == 21);
  CHECK(rows[0].find(",ks,sw state") != std::string::npos);
  CHECK(cli("run --duration 1 --monitor nope=x").code == 2);
  CHECK(cli("run --duration 1 --monitor missing_label").code == 2);
}

TEST_CASE("debug: launch sequence") {
  Outcome o = cli("debug", "get killswitch\nemit launched\nstep 1\nstates\nquit\n");
  CHECK(o.code == 0);
  auto out = lines(o.out);
  REQUIRE(!out.empty());
  CHECK(out[0] == "killswitch = true");
  CHECK(o.out.find("service.eps = ON") != std::string::npos);
  CHECK(o.out.find("killswitch = false") != std::string::npos);
  CHECK(o.out.find("eps: OFF -> ON [eps_power_on]") != std::string::npos);
  CHECK(o.out.find("clock=1") != std::string::npos);
}

TEST_CASE("debug: breakpoint halts at 1800") {
  Outcome o = cli("debug", "emit launched\nbreak obsw BOOT\ncontinue\nget killswitch\n");
  CHECK(o.code == 0);
  CHECK(o.out.find("obsw: WAIT -> BOOT [timer:boot_wait]") != std::string::npos);
  CHECK(o.out.find("clock=1800") != std::string::npos);
  CHECK(o.out.find("clock=1801") == std::string::npos);
}

TEST_CASE("debug: unknown command prints help and continues") {
  Outcome o = cli("debug", "frob\nget sun\n");
  CHECK(o.code == 0);
  CHECK(o.out.find("unknown command 'frob'") != std::string::npos);
  CHECK(o.out.find("step [n]") != std::string::npos);
  CHECK(o.out.find("sun = true") != std::string::npos);
}

TEST_CASE("debug: set drives guards like an assignment") {
  fs::path model = write("gate.fsm",
                         "var open = false\nmachine door {\n  initial SHUT\n"
                         "  state SHUT { on knock [open] -> OPEN }\n  state OPEN { }\n}\n");
  Outcome blocked = cli("debug --model " + model.string(), "emit knock\nstates\n");
  CHECK(blocked.out.find("door = SHUT") != std::string::npos);
  Outcome via_set = cli("debug --model " + model.string(), "set open true\nemit knock\nstates\n");
  CHECK(via_set.out.find("door = OPEN") != std::string::npos);

  fs::path scripted = write("gate2.fsm",
                            "var open = false\nmachine door {\n  initial SHUT\n"
                            "  state SHUT { on unlock / { open = true } -> SHUT on knock [open] -> OPEN }\n"
                            "  state OPEN { }\n}\n");
  Outcome via_action = cli("debug --model " + scripted.string(), "emit unlock\nemit knock\nstates\n");
  CHECK(via_action.out.find("door = OPEN") != std::string::npos);

  Outcome bad = cli("debug --model " + model.string(), "set open 5\nget open\n");
  CHECK(bad.out.find("TypeMismatch") != std::string::npos);
  CHECK(bad.out.find("open = false") != std::string::npos);
}
