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

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "specfilter/filter.hpp"
#include "specfilter/guidance.hpp"
#include "specfilter/matrix.hpp"
#include "specfilter/schedule.hpp"

namespace specfilter {

/// Synthetic style embedding with planted structure: the head singular pairs
/// play the role of style, the tail pairs the role of content.
struct SyntheticStyleSpec {
  std::size_t dim = 64;     // d
  std::size_t tokens = 16;  // N
  std::vector<double> style_sigmas{5.0};
  std::vector<double> content_sigmas{0.5, 0.3};
  std::uint64_t seed = 1;
};

struct StyleEmbedding {
  Matrix key;                  // d x N
  Matrix value;                // d x N
  Matrix content_basis;        // d x c, left singular vectors of the planted key content
  Matrix value_content_basis;  // same for the value
  Matrix key_content;          // sum over content of sigma_c u_c v_c^T
  Matrix value_content;
};

// Throws ConfigError when the spec is inconsistent (see SyntheticStyleSpec).
void validate(const SyntheticStyleSpec& spec);

/// K = sum_s sigma_s u_s v_s^T + sum_c sigma_c u_c v_c^T with orthonormal
/// bases drawn from the seed; V uses an independent pair of bases.
StyleEmbedding make_style_embedding(const SyntheticStyleSpec& spec);

/// ||basis^T x||_F^2: energy of x inside the column span of an orthonormal basis.
double basis_energy(const Matrix& x, const Matrix& basis);

enum class SandboxMode { kBaseline, kCsSvdOnly, kSsCfgOnly, kFull };
std::string_view to_string(SandboxMode m);
SandboxMode parse_sandbox_mode(std::string_view name);

enum class Injection { kAdapter, kJoint };
std::string_view to_string(Injection i);
Injection parse_injection(std::string_view name);

struct SandboxConfig {
  int steps = 30;
  FilterConfig filter{};  // alpha is replaced by the schedule at every step
  ScheduleConfig schedule{};
  double omega = 5.0;
  SandboxMode mode = SandboxMode::kFull;
  std::uint64_t denoiser_seed = 7;
  SyntheticStyleSpec spec{};
  std::size_t layers = 8;
  std::size_t points = 64;
  std::size_t text_tokens = 8;
  Injection injection = Injection::kAdapter;
  double style_weight = 1.0;
  bool attenuated_negative = false;
};

void validate(const SandboxConfig& cfg);

struct LeakageReport {
  double content_energy_before = 0.0;
  double content_energy_after = 0.0;
  std::vector<double> per_step_alpha;
  double sample_content_correlation = 0.0;
};

struct TraceRow {
  int t;
  std::size_t layer;
  const char* role;  // "key" or "value"
  std::size_t index;  // 1-based
  double sigma;
  double sigma_filtered;
  double alpha_t;
};

struct SandboxResult {
  Matrix samples;  // points x 2
  LeakageReport report;
  std::vector<TraceRow> trace;
};

/// Called once per step after the branches for that step are built and
/// before the denoiser sees them. Tests use it to inspect or replace branch
/// tensors.
using BranchHook = std::function<void(int t, GuidanceBranches& branches)>;

/// Runs `steps` guided denoising iterations (t = 0 .. steps-1) of a fixed,
/// seeded toy denoiser over a 2-D point cloud. Each step builds conditional
/// and unconditional style K/V for the configured mode and combines the two
/// noise predictions with classifier-free guidance.
///
/// content_energy_after is measured on the conditional style K/V of the last
/// step. Throws DivergenceError if the latent becomes non-finite.
SandboxResult run_sampler(const SandboxConfig& cfg, const BranchHook& hook = {});

// JSON mapping mirrors SandboxConfig field-for-field; unknown fields raise
// ConfigError listing them, missing fields keep their defaults.
SandboxConfig sandbox_config_from_json(const std::string& text);
std::string sandbox_config_to_json(const SandboxConfig& cfg);
std::string report_to_json(const LeakageReport& report);
std::string trace_to_csv(const std::vector<TraceRow>& trace);

}  // namespace specfilter
