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

#include "cubesim/mission.hpp"

#include <algorithm>
#include <cmath>

namespace cubesim {

void OrbitProfile::validate() const {
  if (period_s <= 0)
    throw Error(ErrorCode::ConfigError, "orbit.period must be positive");
  if (!(eclipse_fraction >= 0.0 && eclipse_fraction <= 1.0))
    throw Error(ErrorCode::ConfigError, "orbit.eclipse_fraction must lie in [0, 1]");
  for (const auto &p : passes) {
    if (p.duration_s <= 0 || p.duration_s >= period_s)
      throw Error(ErrorCode::ConfigError, "pass duration must be positive and shorter than the period");
    if (p.start_s < 0)
      throw Error(ErrorCode::ConfigError, "pass start must be non-negative");
  }
}

double OrbitProfile::sunlit_s() const {
  double sun = (1.0 - eclipse_fraction) * static_cast<double>(period_s);
  double nearest = std::round(sun);
  if (std::fabs(sun - nearest) < 1e-9 * std::max(1.0, static_cast<double>(period_s)))
    return nearest;
  return sun;
}

bool OrbitProfile::in_sun(std::int64_t clock_s) const {
  return static_cast<double>(clock_s % period_s) < sunlit_s();
}

bool OrbitProfile::in_pass(std::int64_t clock_s) const {
  for (const auto &p : passes) {
    std::int64_t phase = ((clock_s - p.start_s) % period_s + period_s) % period_s;
    if (phase < p.duration_s)
      return true;
  }
  return false;
}

std::vector<Event> environment_events(std::int64_t clock_s, std::int64_t tick_s,
                                      const OrbitProfile &profile) {
  std::vector<Event> out;
  bool sun = profile.in_sun(clock_s);
  bool pass = profile.in_pass(clock_s);
  bool first = clock_s == 0;
  bool was_sun = !first && profile.in_sun(clock_s - tick_s);
  bool was_pass = !first && profile.in_pass(clock_s - tick_s);
  if (first || sun != was_sun)
    out.push_back(Event::external(sun ? "sun_enter" : "eclipse_enter", clock_s));
  if (first ? pass : pass != was_pass)
    out.push_back(Event::external(pass ? "pass_start" : "pass_end", clock_s));
  return out;
}

void PowerModel::validate() const {
  if (!(capacity_wh > 0) || !(generation_w > 0))
    throw Error(ErrorCode::ConfigError, "power.capacity and power.generation must be positive");
  for (const auto &[name, w] : loads_w)
    if (!(w > 0))
      throw Error(ErrorCode::ConfigError, "power.load." + name + " must be positive");
}

double battery_update(double level_wh, bool generation_on, double active_loads_w, double dt_s,
                      const PowerModel &power) {
  double net_w = (generation_on ? power.generation_w : 0.0) - active_loads_w;
  return std::clamp(level_wh + net_w * dt_s / 3600.0, 0.0, power.capacity_wh);
}

} // namespace cubesim
