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

#include <cstddef>
#include <span>
#include <vector>

#include "specfilter/matrix.hpp"
#include "specfilter/svd.hpp"

namespace specfilter {

struct FilterConfig {
  std::size_t top_k = 1;
  double alpha = 0.01;  // suppression factor, >= 0
};

/// Singular values at or below this fraction of sigma_1 are flushed to zero
/// before any filtering.
inline constexpr double kSpectrumFloor = 1e-12;

/// Tail suppression: sigma'_i = sigma_i for i <= k (1-based), otherwise
/// exp(-alpha * sigma_i) * sigma_i. The result keeps positional pairing with
/// the input and is not re-sorted, so the tail may come out in inverted order.
/// Throws DomainError on a negative or non-finite alpha or sigma entry.
std::vector<double> suppress_sigma(std::span<const double> sigma, const FilterConfig& cfg);

struct SpectralSplit {
  Matrix filtered;  // u * diag(suppress_sigma(sigma)) * v^T
  Matrix main;      // top-k directions only
  Matrix tail;      // everything past k, unattenuated
  std::vector<double> sigma_before;
  std::vector<double> sigma_after;
  std::size_t effective_k = 0;  // top_k after clamping to the spectrum length
};

/// Decomposes x and rebuilds the filtered, main and tail matrices from one
/// shared SVD. top_k larger than the spectrum is clamped with a warning. A
/// tail (or filtered output) whose spectrum is entirely zero is returned as
/// an exact zero matrix.
SpectralSplit split(const Matrix& x, const FilterConfig& cfg);

/// Same as above for a precomputed decomposition.
SpectralSplit split(const SvdFactors& factors, const FilterConfig& cfg);

/// Ablation path: filter the raw encoder feature f (d_f x N) with the same
/// rule, then project with a weight (d x d_f).
Matrix filter_then_project(const Matrix& weight, const Matrix& feature, const FilterConfig& cfg);

}  // namespace specfilter
