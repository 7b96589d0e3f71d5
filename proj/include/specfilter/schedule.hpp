// Copyright 2026 The specfilter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace specfilter {

enum class ScheduleVariant { kSigmoid, kFixed, kLinear, kExponential };

std::string_view to_string(ScheduleVariant v);
// Throws ConfigError naming the unknown variant.
ScheduleVariant parse_schedule_variant(std::string_view name);

/// Time-aware suppression strength. t counts completed denoising iterations:
/// t = 0 at the start of sampling, t = total_steps at the end.
struct ScheduleConfig {
  double alpha0 = 0.01;
  double gamma = 40.0;  // sigmoid steepness
  double c = 0.25;      // sigmoid midpoint, as a fraction of total_steps
  int total_steps = 30;
  ScheduleVariant variant = ScheduleVariant::kSigmoid;
  double lambda = 3.0;  // exponential variant decay rate
};

// Throws ConfigError when a field is out of range for the chosen variant.
void validate(const ScheduleConfig& cfg);

/// s(t) = 1 / (1 + exp(-gamma * (t/T - c))). t is real-valued so that the
/// midpoint t = c*T can be evaluated even when it is not an integer step.
/// Throws DomainError for t outside [0, T].
double s_of_t(const ScheduleConfig& cfg, double t);

/// alpha_t per variant:
///   sigmoid      alpha0 * (1 - s(t))
///   fixed        alpha0
///   linear       alpha0 * (1 - t/T)
///   exponential  alpha0 * exp(-lambda * t/T)
double alpha_at(const ScheduleConfig& cfg, double t);

}  // namespace specfilter
