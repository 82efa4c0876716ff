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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cubesim {

/// 1-based line/column into a model or plan text. Column 0 means unknown.
struct SourcePos {
  int line = 0;
  int column = 0;

  // Positions are diagnostics only; two definitions that differ only in
  // where they were written compare equal.
  friend bool operator==(const SourcePos &, const SourcePos &) { return true; }
};

enum class ErrorCode : std::uint8_t {
  // Definition / parse time
  SyntaxError,
  DuplicateState,
  DuplicateVar,
  DuplicateMachine,
  DuplicateMonitor,
  UnknownSubmachine,
  SharedSubmachine,
  NestingCycle,
  NonMonotonicTimes,
  MisalignedTime,
  ConfigError,
  IoError,
  // Run time
  UndeclaredVariable,
  TypeMismatch,
  DivisionByZero,
  GuardTypeError,
  UnknownMachine,
  BadDelay,
  LivelockError,
  // Oracle / telemetry
  OracleUnsupported,
  StateExplosion,
  MalformedCsv,
};

std::string_view to_string(ErrorCode code);

/// True for errors raised while loading definitions (CLI exit status 2).
bool is_definition_error(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message, SourcePos pos = {});

  ErrorCode code() const { return code_; }
  const SourcePos &pos() const { return pos_; }
  /// Message without the code prefix or position decoration.
  const std::string &detail() const { return detail_; }

  /// Returns a copy whose message is prefixed with `context`.
  Error with_context(const std::string &context) const;

private:
  ErrorCode code_;
  SourcePos pos_;
  std::string detail_;
};

} // namespace cubesim
