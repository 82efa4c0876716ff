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

// Text formats: `.fsm` model files and `.plan` operational plans.
//
// Model grammar (informal):
//   model      = { var | machine | monitor }
//   var        = "var" ident "=" literal
//   machine    = "machine" ident "{" "initial" ident { state | monitor } "}"
//   state      = "state" ident "{" [entry] [exit] [every] ["uses" ident {"," ident}]
//                transition* "}"
//   entry      = "entry" block          exit = "exit" block
//   every      = "every" seconds block
//   transition = "on" (ident | "timer" ident | "auto") ["[" expr "]"] ["/" block] "->" ident
//   monitor    = "monitor" path "as" string
//   block      = "{" { stmt [";"] } "}"
//   stmt       = ident "=" expr | "emit" ident | "start_timer" "(" ident "," expr ")"
//              | "if" expr block ["else" (block | if-stmt)]
//
// Plan grammar:
//   plan  = "plan" ident "{" entry* "}"
//   entry = "at" seconds "emit" ident
//         | "at" seconds "expect" expr
//         | "expect" "always" expr
//         | "expect" "eventually" "within" seconds ".." seconds expr
//
// "#" starts a comment running to end of line.

#include <string>
#include <string_view>
#include <vector>

#include "cubesim/model.hpp"

namespace cubesim {

struct Injection {
  std::int64_t at_s = 0;
  std::string event;
  SourcePos pos;

  bool operator==(const Injection &) const = default;
};

struct Assertion {
  enum class Kind : std::uint8_t { At, Always, EventuallyWithin };

  Kind kind = Kind::At;
  std::int64_t t1_s = 0; // At time, or window start
  std::int64_t t2_s = 0; // window end (EventuallyWithin)
  Expr predicate;
  SourcePos pos;

  bool operator==(const Assertion &) const = default;
};

struct PlanFile {
  std::string name;
  std::vector<Injection> injections;
  std::vector<Assertion> assertions;

  /// Latest time any entry refers to.
  std::int64_t horizon_s() const;

  bool operator==(const PlanFile &) const = default;
};

ModelFile parse_model(std::string_view text);

/// `tick_s` is the simulation quantum; every plan time must be a multiple.
PlanFile parse_plan(std::string_view text, std::int64_t tick_s = 1);

Expr parse_expression(std::string_view text);
ActionBlock parse_actions(std::string_view text);

std::string print_expr(const Expr &e);
std::string print_assertion(const Assertion &a);
std::string print_model(const ModelFile &model);
std::string print_plan(const PlanFile &plan);

std::string read_text_file(const std::string &path);

} // namespace cubesim
