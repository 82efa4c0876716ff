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

// System-level stochastic faults drawn from a Weibull reliability model.
// A fault only increments a counter and raises a "fault" event; no fault
// behaviour is attached.

#include <cstdint>
#include <random>

namespace cubesim {

/// R(t) = exp(-(t / eta)^beta)
double reliability(double t_s, double beta, double eta_s);

/// Probability of failing in (t, t + dt] given survival to t:
/// 1 - R(t + dt) / R(t).
double step_fault_probability(double t_s, double dt_s, double beta, double eta_s);

struct FaultModel {
  double beta = 1.2;
  double eta_s = 2.0e7;
  std::uint64_t seed = 0;
  std::uint64_t fault_count = 0;
  bool enabled = false;
  /// Compatibility switch: fault iff the draw is below R(t + dt) instead of
  /// below the step probability.
  bool literal_rule = false;

  /// Throws ConfigError unless beta > 0 and eta > 0.
  void validate() const;
};

/// Draws u ~ U[0, 1) and decides whether a fault occurs in (t, t + dt].
/// Increments `model.fault_count` on a fault. Disabled models never fault and
/// consume no randomness.
bool sample_fault(FaultModel &model, double t_s, double dt_s, std::mt19937_64 &rng);

} // namespace cubesim
