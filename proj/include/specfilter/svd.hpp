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
#include <vector>

#include "specfilter/matrix.hpp"

namespace specfilter {

/// Thin singular value decomposition x = u * diag(sigma) * v^T.
///
/// For an m x n input with r = min(m, n): u is m x r, v is n x r, both with
/// orthonormal columns, and sigma holds r non-negative values sorted
/// non-increasing. Zero singular values are admitted; their u/v columns are an
/// arbitrary orthonormal completion.
struct SvdFactors {
  Matrix u;
  std::vector<double> sigma;
  Matrix v;

  std::size_t rank_bound() const noexcept { return sigma.size(); }
};

struct SvdOptions {
  int max_sweeps = 100;
};

/// One-sided (Hestenes) Jacobi SVD.
///
/// Sweeps cyclically over column pairs until every pair is orthogonal to
/// working precision relative to its own norms; the final off-diagonal
/// residual is below 1e-12 * ||x||_F^2. Throws ConvergenceError if the sweep
/// budget runs out, DomainError on an empty input. Deterministic for a given
/// input and build.
SvdFactors svd(const Matrix& x, const SvdOptions& options = {});

/// u * diag(sigma) * v^T. Throws ShapeError if the factor shapes disagree.
Matrix reconstruct(const SvdFactors& f);

/// Same as reconstruct() but with a replacement spectrum paired positionally
/// with the columns of u and v.
Matrix reconstruct(const SvdFactors& f, std::span<const double> sigma);

}  // namespace specfilter
