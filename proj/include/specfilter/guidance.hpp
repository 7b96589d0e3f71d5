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

#include <span>
#include <string>
#include <vector>

#include "specfilter/filter.hpp"
#include "specfilter/matrix.hpp"
#include "specfilter/schedule.hpp"
#include "specfilter/svd.hpp"

namespace specfilter {

/// Classifier-free guidance: eps_uncond + omega * (eps_cond - eps_uncond).
Matrix cfg_combine(const Matrix& eps_cond, const Matrix& eps_uncond, double omega);

struct KeyValue {
  Matrix key;    // d x N
  Matrix value;  // d x N
};

struct KeyValueFactors {
  SvdFactors key;
  SvdFactors value;
};

struct LayerSpectra {
  std::vector<double> key_before, key_after;
  std::vector<double> value_before, value_after;
};

/// Per-layer conditional / unconditional style K/V for one sampling step.
/// cond holds the suppressed embeddings; uncond holds the isolated tail.
struct GuidanceBranches {
  std::vector<KeyValue> cond;
  std::vector<KeyValue> uncond;
  double omega = 5.0;
  double alpha_t = 0.0;
  std::vector<LayerSpectra> spectra;
};

struct BranchOptions {
  double omega = 5.0;
  // Use the suppressed tail (filtered - main) as the negative instead of the
  // raw tail.
  bool attenuated_negative = false;
};

std::vector<KeyValueFactors> decompose_layers(std::span<const KeyValue> layers);

/// Splits every layer at top_k with alpha = alpha_at(sched, t). K and V are
/// decomposed independently. Layers are processed in parallel, output order
/// follows input order.
GuidanceBranches build_branches(std::span<const KeyValue> layers, const FilterConfig& cfg,
                                const ScheduleConfig& sched, double t, const BranchOptions& options = {});

GuidanceBranches build_branches(std::span<const KeyValueFactors> layers, const FilterConfig& cfg,
                                const ScheduleConfig& sched, double t, const BranchOptions& options = {});

}  // namespace specfilter
