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

#include "specfilter/schedule.hpp"

#include <cmath>
#include <string>

#include "specfilter/errors.hpp"

namespace specfilter {

namespace {

void check_step(const ScheduleConfig& cfg, double t) {
  if (!(t >= 0.0 && t <= static_cast<double>(cfg.total_steps))) {
    throw DomainError("step " + std::to_string(t) + " outside [0, " + std::to_string(cfg.total_steps) + "]");
  }
}

// 1 / (1 + exp(-z)) without overflow for large |z|.
double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_argument(const ScheduleConfig& cfg, double t) {
  return cfg.gamma * (t / static_cast<double>(cfg.total_steps) - cfg.c);
}

}  // namespace

std::string_view to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::kSigmoid: return "sigmoid";
    case ScheduleVariant::kFixed: return "fixed";
    case ScheduleVariant::kLinear: return "linear";
    case ScheduleVariant::kExponential: return "exponential";
  }
  return "unknown";
}

ScheduleVariant parse_schedule_variant(std::string_view name) {
  for (auto v : {ScheduleVariant::kSigmoid, ScheduleVariant::kFixed, ScheduleVariant::kLinear,
                 ScheduleVariant::kExponential}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown schedule variant '" + std::string(name) +
                    "' (expected sigmoid, fixed, linear or exponential)");
}

void validate(const ScheduleConfig& cfg) {
  if (!std::isfinite(cfg.alpha0) || cfg.alpha0 < 0.0) throw ConfigError("alpha0 must be finite and >= 0");
  if (cfg.total_steps < 1) throw ConfigError("total_steps must be >= 1");
  switch (cfg.variant) {
    case ScheduleVariant::kSigmoid:
      if (!std::isfinite(cfg.gamma)) throw ConfigError("sigmoid schedule needs a finite gamma");
      if (!(cfg.c >= 0.0 && cfg.c <= 1.0)) throw ConfigError("sigmoid midpoint c must lie in [0, 1]");
      break;
    case ScheduleVariant::kExponential:
      if (!std::isfinite(cfg.lambda) || cfg.lambda <= 0.0) throw ConfigError("exponential schedule needs lambda > 0");
      break;
    case ScheduleVariant::kFixed:
    case ScheduleVariant::kLinear:
      break;
  }
}

double s_of_t(const ScheduleConfig& cfg, double t) {
  validate(cfg);
  check_step(cfg, t);
  return logistic(sigmoid_argument(cfg, t));
}

double alpha_at(const ScheduleConfig& cfg, double t) {
  validate(cfg);
  check_step(cfg, t);
  const double frac = t / static_cast<double>(cfg.total_steps);
  switch (cfg.variant) {
    case ScheduleVariant::kSigmoid:
      // 1 - s(t) == logistic(-z); evaluated directly so late steps keep their
      // relative precision instead of cancelling against 1.
      return cfg.alpha0 * logistic(-sigmoid_argument(cfg, t));
    case ScheduleVariant::kFixed:
      return cfg.alpha0;
    case ScheduleVariant::kLinear:
      return cfg.alpha0 * (1.0 - frac);
    case ScheduleVariant::kExponential:
      return cfg.alpha0 * std::exp(-cfg.lambda * frac);
  }
  throw ConfigError("unknown schedule variant");
}

}  // namespace specfilter
