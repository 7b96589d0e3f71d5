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

#include "specfilter/guidance.hpp"

#include <cmath>
#include <string>

#include "specfilter/errors.hpp"
#include "specfilter/parallel.hpp"

namespace specfilter {

Matrix cfg_combine(const Matrix& eps_cond, const Matrix& eps_uncond, double omega) {
  if (eps_cond.rows() != eps_uncond.rows() || eps_cond.cols() != eps_uncond.cols()) {
    throw ShapeError("cfg_combine: conditional " + std::to_string(eps_cond.rows()) + "x" +
                     std::to_string(eps_cond.cols()) + " vs unconditional " + std::to_string(eps_uncond.rows()) +
                     "x" + std::to_string(eps_uncond.cols()));
  }
  if (!std::isfinite(omega)) throw DomainError("cfg_combine: guidance scale must be finite");
  MatrixBuilder out(eps_uncond);
  auto d = out.data();
  const auto c = eps_cond.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = d[i] + omega * (c[i] - d[i]);
  return std::move(out).finish();
}

std::vector<KeyValueFactors> decompose_layers(std::span<const KeyValue> layers) {
  std::vector<KeyValueFactors> out(layers.size());
  parallel_for(layers.size(), [&](std::size_t i) {
    out[i].key = svd(layers[i].key);
    out[i].value = svd(layers[i].value);
  });
  return out;
}

GuidanceBranches build_branches(std::span<const KeyValue> layers, const FilterConfig& cfg,
                                const ScheduleConfig& sched, double t, const BranchOptions& options) {
  const auto factors = decompose_layers(layers);
  return build_branches(std::span<const KeyValueFactors>(factors), cfg, sched, t, options);
}

GuidanceBranches build_branches(std::span<const KeyValueFactors> layers, const FilterConfig& cfg,
                                const ScheduleConfig& sched, double t, const BranchOptions& options) {
  const FilterConfig step_cfg{cfg.top_k, alpha_at(sched, t)};

  GuidanceBranches out;
  out.omega = options.omega;
  out.alpha_t = step_cfg.alpha;
  out.cond.resize(layers.size());
  out.uncond.resize(layers.size());
  out.spectra.resize(layers.size());

  parallel_for(layers.size(), [&](std::size_t i) {
    const SpectralSplit ks = split(layers[i].key, step_cfg);
    const SpectralSplit vs = split(layers[i].value, step_cfg);
    out.cond[i] = {ks.filtered, vs.filtered};
    if (options.attenuated_negative) {
      out.uncond[i] = {ks.filtered - ks.main, vs.filtered - vs.main};
    } else {
      out.uncond[i] = {ks.tail, vs.tail};
    }
    out.spectra[i] = {ks.sigma_before, ks.sigma_after, vs.sigma_before, vs.sigma_after};
  });
  return out;
}

}  // namespace specfilter
