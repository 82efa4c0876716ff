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

// CubeSat reference mission: orbit/visibility profile, power budget, and the
// shipped reference model and launch plan.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cubesim/engine.hpp"

namespace cubesim {

struct PassWindow {
  std::int64_t start_s = 0;    // offset within the orbit
  std::int64_t duration_s = 0;

  bool operator==(const PassWindow &) const = default;
};

/// Illustrative LEO defaults: 90 min orbit, one third in eclipse, one ground
/// pass of 8 minutes per orbit.
struct OrbitProfile {
  std::int64_t period_s = 5400;
  double eclipse_fraction = 1.0 / 3.0;
  std::vector<PassWindow> passes{{2400, 480}};

  /// Throws ConfigError on a broken invariant.
  void validate() const;
  /// Length of the sunlit part of each orbit, snapped to whole seconds when
  /// within rounding noise of one.
  double sunlit_s() const;
  bool in_sun(std::int64_t clock_s) const;
  bool in_pass(std::int64_t clock_s) const;
};

/// Edge-triggered environment events at `clock_s`, comparing against the
/// previous tick. At clock 0 the initial condition is announced.
/// Emits, in order, sun_enter/eclipse_enter then pass_start/pass_end.
std::vector<Event> environment_events(std::int64_t clock_s, std::int64_t tick_s,
                                      const OrbitProfile &profile);

struct PowerModel {
  double capacity_wh = 20.0;
  double generation_w = 4.0;
  std::map<std::string, double, std::less<>> loads_w{
      {"eps", 0.5}, {"obc", 1.0}, {"ants", 0.5}, {"ttc", 0.5}, {"payload", 2.0}};

  void validate() const;
};

/// clamp(level + (generation * on - loads) * dt / 3600, 0, capacity)
double battery_update(double level_wh, bool generation_on, double active_loads_w, double dt_s,
                      const PowerModel &power);

/// Text of the shipped `reference.fsm`.
std::string_view reference_model();
/// Text of the shipped `launch.plan`.
std::string_view launch_plan();
/// Text of the shipped `mission.cfg`.
std::string_view mission_config();

} // namespace cubesim
