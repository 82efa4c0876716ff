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

#include "cubesim/error.hpp"

namespace cubesim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::DuplicateState: return "DuplicateState";
  case ErrorCode::DuplicateVar: return "DuplicateVar";
  case ErrorCode::DuplicateMachine: return "DuplicateMachine";
  case ErrorCode::DuplicateMonitor: return "DuplicateMonitor";
  case ErrorCode::UnknownSubmachine: return "UnknownSubmachine";
  case ErrorCode::SharedSubmachine: return "SharedSubmachine";
  case ErrorCode::NestingCycle: return "NestingCycle";
  case ErrorCode::NonMonotonicTimes: return "NonMonotonicTimes";
  case ErrorCode::MisalignedTime: return "MisalignedTime";
  case ErrorCode::ConfigError: return "ConfigError";
  case ErrorCode::IoError: return "IoError";
  case ErrorCode::UndeclaredVariable: return "UndeclaredVariable";
  case ErrorCode::TypeMismatch: return "TypeMismatch";
  case ErrorCode::DivisionByZero: return "DivisionByZero";
  case ErrorCode::GuardTypeError: return "GuardTypeError";
  case ErrorCode::UnknownMachine: return "UnknownMachine";
  case ErrorCode::BadDelay: return "BadDelay";
  case ErrorCode::LivelockError: return "LivelockError";
  case ErrorCode::OracleUnsupported: return "OracleUnsupported";
  case ErrorCode::StateExplosion: return "StateExplosion";
  case ErrorCode::MalformedCsv: return "MalformedCsv";
  }
  return "Error";
}

bool is_definition_error(ErrorCode code) {
  switch (code) {
  case ErrorCode::SyntaxError:
  case ErrorCode::DuplicateState:
  case ErrorCode::DuplicateVar:
  case ErrorCode::DuplicateMachine:
  case ErrorCode::DuplicateMonitor:
  case ErrorCode::UnknownSubmachine:
  case ErrorCode::SharedSubmachine:
  case ErrorCode::NestingCycle:
  case ErrorCode::NonMonotonicTimes:
  case ErrorCode::MisalignedTime:
  case ErrorCode::ConfigError:
  case ErrorCode::IoError:
  case ErrorCode::MalformedCsv:
    return true;
  default:
    return false;
  }
}

namespace {

std::string decorate(ErrorCode code, const std::string &message, SourcePos pos) {
  std::string out(to_string(code));
  if (pos.line > 0) {
    out += " at line " + std::to_string(pos.line);
    if (pos.column > 0)
      out += ", column " + std::to_string(pos.column);
  }
  out += ": ";
  out += message;
  return out;
}

} // namespace

Error::Error(ErrorCode code, const std::string &message, SourcePos pos)
    : std::runtime_error(decorate(code, message, pos)), code_(code), pos_(pos),
      detail_(message) {}

Error Error::with_context(const std::string &context) const {
  return Error(code_, context + ": " + detail_, pos_);
}

} // namespace cubesim
