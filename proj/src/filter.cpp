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

#include "specfilter/filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specfilter/errors.hpp"
#include "specfilter/log.hpp"

namespace specfilter {

namespace {

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DomainError("suppression factor alpha must be finite and non-negative, got " + std::to_string(alpha));
  }
}

bool all_zero(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double s) { return s == 0.0; });
}

Matrix rebuild(const SvdFactors& f, std::span<const double> sigma) {
  if (all_zero(sigma)) return Matrix::zeros(f.u.rows(), f.v.rows());
  return reconstruct(f, sigma);
}

}  // namespace

std::vector<double> suppress_sigma(std::span<const double> sigma, const FilterConfig& cfg) {
  check_alpha(cfg.alpha);
  std::vector<double> out(sigma.begin(), sigma.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]) || out[i] < 0.0) {
      throw DomainError("singular value " + std::to_string(i + 1) + " is negative or non-finite");
    }
    if (i >= cfg.top_k) out[i] = std::exp(-cfg.alpha * out[i]) * out[i];
  }
  return out;
}

SpectralSplit split(const Matrix& x, const FilterConfig& cfg) {
  check_alpha(cfg.alpha);
  return split(svd(x), cfg);
}

SpectralSplit split(const SvdFactors& factors, const FilterConfig& cfg) {
  check_alpha(cfg.alpha);
  const std::size_t r = factors.sigma.size();
  SpectralSplit out;
  out.effective_k = std::min(cfg.top_k, r);
  if (cfg.top_k > r) {
    log::warn("top_k " + std::to_string(cfg.top_k) + " exceeds spectrum length " + std::to_string(r) +
              "; clamping to " + std::to_string(r));
  }

  out.sigma_before = factors.sigma;
  const double floor = r == 0 ? 0.0 : kSpectrumFloor * factors.sigma[0];
  for (double& s : out.sigma_before) {
    if (s <= floor) s = 0.0;
  }
  out.sigma_after = suppress_sigma(out.sigma_before, {out.effective_k, cfg.alpha});

  std::vector<double> head(out.sigma_before);
  std::vector<double> tail(out.sigma_before);
  std::fill(head.begin() + static_cast<std::ptrdiff_t>(out.effective_k), head.end(), 0.0);
  std::fill(tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>(out.effective_k), 0.0);

  out.main = rebuild(factors, head);
  out.tail = rebuild(factors, tail);
  out.filtered = rebuild(factors, out.sigma_after);
  return out;
}

Matrix filter_then_project(const Matrix& weight, const Matrix& feature, const FilterConfig& cfg) {
  if (weight.cols() != feature.rows()) {
    throw ShapeError("filter_then_project: weight has " + std::to_string(weight.cols()) +
                     " columns but feature has " + std::to_string(feature.rows()) + " rows");
  }
  return matmul(weight, split(feature, cfg).filtered);
}

}  // namespace specfilter
