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

// Per-tick analysis files: monitored variables and machine states as CSV.
//
// Byte format: comma delimiter, LF line endings, header row first. A field is
// double-quoted when it contains a comma, a quote, CR or LF; inner quotes are
// doubled. Numbers use at most 9 significant digits, booleans true/false,
// machine states "path.STATE".

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cubesim/engine.hpp"

namespace cubesim {

struct Trace {
  std::vector<std::string> columns; // "time_s" first
  std::vector<std::vector<std::string>> rows;

  bool operator==(const Trace &) const = default;
};

/// A MonitorSpec bound to either a machine node or a variable.
struct Probe {
  std::string column;
  int machine = -1;  // >= 0 for state monitors
  std::string variable;
};

/// Machine names/paths take precedence over variables of the same name.
/// Throws UndeclaredVariable for a source that is neither.
std::vector<Probe> resolve_monitors(const LinkedModel &model, const VariableStore &store,
                                    const std::vector<MonitorSpec> &monitors);

std::vector<std::string> trace_columns(const std::vector<Probe> &probes);

std::vector<std::string> snapshot(const SimState &state, const LinkedModel &model,
                                  const std::vector<Probe> &probes);

void write_csv(const Trace &trace, std::ostream &out);
std::string to_csv(const Trace &trace);
void write_csv_file(const Trace &trace, const std::string &path);

/// Throws MalformedCsv with the 1-based line of the problem.
Trace read_csv(std::string_view text);

/// Checks row widths and that time_s advances by exactly `tick_s`.
void validate_trace(const Trace &trace, std::int64_t tick_s);

} // namespace cubesim
