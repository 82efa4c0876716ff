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

#include "cubesim/fault.hpp"

#include <algorithm>
#include <cmath>

#include "cubesim/engine.hpp"
#include "cubesim/error.hpp"

namespace cubesim {

double reliability(double t_s, double beta, double eta_s) {
  return std::exp(-std::pow(t_s / eta_s, beta));
}

double step_fault_probability(double t_s, double dt_s, double beta, double eta_s) {
  // 1 - exp(-(H(t+dt) - H(t))) with cumulative hazard H(t) = (t/eta)^beta.
  double h = std::pow(t_s / eta_s, beta);
  double dh = t_s > 0 ? h * std::expm1(beta * std::log1p(dt_s / t_s)) : std::pow(dt_s / eta_s, beta);
  if (std::isnan(dh))
    dh = std::pow((t_s + dt_s) / eta_s, beta) - h;
  if (std::isnan(dh))
    return 1.0; // survival to t has already underflowed
  return std::clamp(-std::expm1(-dh), 0.0, 1.0);
}

void FaultModel::validate() const {
  if (!(beta > 0) || !(eta_s > 0) || !std::isfinite(beta) || !std::isfinite(eta_s))
    throw Error(ErrorCode::ConfigError, "fault.beta and fault.eta must be positive");
}

bool sample_fault(FaultModel &model, double t_s, double dt_s, std::mt19937_64 &rng) {
  if (!model.enabled)
    return false;
  double u = uniform01(rng);
  double threshold = model.literal_rule ? reliability(t_s + dt_s, model.beta, model.eta_s)
                                        : step_fault_probability(t_s, dt_s, model.beta, model.eta_s);
  bool fault = u < threshold;
  if (fault)
    ++model.fault_count;
  return fault;
}

} // namespace cubesim
