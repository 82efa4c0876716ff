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

#include "cubesim/telemetry.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace cubesim {

std::vector<Probe> resolve_monitors(const LinkedModel &model, const VariableStore &store,
                                    const std::vector<MonitorSpec> &monitors) {
  std::vector<Probe> out;
  for (const auto &m : monitors) {
    Probe p;
    p.column = m.column;
    p.machine = model.find_machine(m.source);
    if (p.machine < 0) {
      if (!store.contains(m.source))
        throw Error(ErrorCode::UndeclaredVariable,
                    "monitor '" + m.column + "': '" + m.source +
                        "' is neither a machine nor a declared variable",
                    m.pos);
      p.variable = m.source;
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> trace_columns(const std::vector<Probe> &probes) {
  std::vector<std::string> cols{"time_s"};
  for (const auto &p : probes)
    cols.push_back(p.column);
  return cols;
}

std::vector<std::string> snapshot(const SimState &state, const LinkedModel &model,
                                  const std::vector<Probe> &probes) {
  std::vector<std::string> row;
  row.reserve(probes.size() + 1);
  row.push_back(std::to_string(state.clock_s));
  for (const auto &p : probes)
    row.push_back(p.machine >= 0 ? state.state_path(model, p.machine)
                                 : format_value(state.store.get(p.variable)));
  return row;
}

namespace {

bool needs_quotes(const std::string &field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

void put_field(std::ostream &out, const std::string &field) {
  if (!needs_quotes(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"')
      out << '"';
    out << c;
  }
  out << '"';
}

void put_row(std::ostream &out, const std::vector<std::string> &row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i)
      out << ',';
    put_field(out, row[i]);
  }
  out << '\n';
}

} // namespace

void write_csv(const Trace &trace, std::ostream &out) {
  put_row(out, trace.columns);
  for (const auto &r : trace.rows)
    put_row(out, r);
}

std::string to_csv(const Trace &trace) {
  std::ostringstream ss;
  write_csv(trace, ss);
  return ss.str();
}

void write_csv_file(const Trace &trace, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_csv(trace, out);
  if (!out)
    throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

Trace read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::size_t i = 0;
  int line = 1;
  auto fail = [&](const std::string &msg, int at) -> void {
    throw Error(ErrorCode::MalformedCsv, msg + " (line " + std::to_string(at) + ")", {at, 0});
  };

  while (i < text.size()) {
    int record_line = line;
    std::vector<std::string> record;
    std::string field;
    for (;;) {
      if (i < text.size() && text[i] == '"') {
        ++i;
        for (;;) {
          if (i >= text.size())
            fail("unterminated quoted field", record_line);
          char c = text[i++];
          if (c == '"') {
            if (i < text.size() && text[i] == '"') {
              field += '"';
              ++i;
              continue;
            }
            break;
          }
          if (c == '\n')
            ++line;
          field += c;
        }
        if (i < text.size() && text[i] != ',' && text[i] != '\n' &&
            !(text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n'))
          fail("unexpected character after closing quote", line);
      } else {
        while (i < text.size() && text[i] != ',' && text[i] != '\n') {
          if (text[i] == '"')
            fail("quote inside unquoted field", line);
          if (text[i] == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
            break;
          field += text[i++];
        }
      }
      record.push_back(std::move(field));
      field.clear();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      break;
    }
    if (i < text.size() && text[i] == '\r')
      ++i;
    if (i < text.size() && text[i] == '\n') {
      ++i;
      ++line;
    } else if (i < text.size()) {
      fail("unexpected character", line);
    } else {
      // A final record without a trailing newline is accepted.
    }
    if (!records.empty() && record.size() != records.front().size())
      fail("expected " + std::to_string(records.front().size()) + " fields, found " +
               std::to_string(record.size()),
           record_line);
    records.push_back(std::move(record));
  }
  if (records.empty())
    fail("missing header row", 1);

  Trace t;
  t.columns = std::move(records.front());
  t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return t;
}

void validate_trace(const Trace &trace, std::int64_t tick_s) {
  if (trace.columns.empty() || trace.columns.front() != "time_s")
    throw Error(ErrorCode::MalformedCsv, "first column must be time_s", {1, 0});
  std::int64_t prev = 0;
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    int line = static_cast<int>(r) + 2;
    const auto &row = trace.rows[r];
    if (row.size() != trace.columns.size())
      throw Error(ErrorCode::MalformedCsv, "row width mismatch", {line, 0});
    std::int64_t t = 0;
    try {
      std::size_t used = 0;
      t = std::stoll(row.front(), &used);
      if (used != row.front().size())
        throw std::invalid_argument("trailing");
    } catch (const std::exception &) {
      throw Error(ErrorCode::MalformedCsv, "time_s is not an integer", {line, 0});
    }
    if (t != prev + tick_s)
      throw Error(ErrorCode::MalformedCsv, "time_s does not advance by one tick", {line, 0});
    prev = t;
  }
}

} // namespace cubesim
