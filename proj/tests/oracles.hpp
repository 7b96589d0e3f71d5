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

// Test-only reference implementations. Nothing here calls into the library's
// SVD, filter or attention code paths, so they can serve as independent
// oracles for those modules.

#include <cstdint>
#include <random>
#include <vector>

#include "specfilter/matrix.hpp"

namespace specfilter::testing {

// Plain std::vector<std::vector<double>> matrix for oracle arithmetic.
using Dense = std::vector<std::vector<double>>;

Dense to_dense(const Matrix& m);
Matrix from_dense(const Dense& d);

// Triple-loop product.
Dense naive_matmul(const Dense& a, const Dense& b);

// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations,
// sorted non-increasing.
std::vector<double> jacobi_eigenvalues(Dense a);

// sigma^2 oracle: eigenvalues of x^T x (or x x^T, whichever is smaller).
std::vector<double> gram_eigenvalues(const Matrix& x);

// Deterministic generators for property sweeps (std::mt19937_64 + normal
// distribution; test-local, need not be portable).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}
  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  Matrix matrix(std::size_t rows, std::size_t cols, double scale = 1.0);
  // rows x cols with orthonormal columns.
  Matrix orthonormal(std::size_t rows, std::size_t cols);
  // Random matrix of given rank built as a sum of outer products.
  Matrix low_rank(std::size_t rows, std::size_t cols, std::size_t rank);
  // Matrix with prescribed singular values (some repeated) in random bases.
  Matrix with_spectrum(std::size_t rows, std::size_t cols, const std::vector<double>& sigma);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Sum of sigma_k * u_k v_k^T over the columns of u and v (naive loops).
Matrix outer_sum(const Matrix& u, const Matrix& v, const std::vector<double>& sigma);

// max |(m^T m - I)_ij|
double orthogonality_defect(const Matrix& m);

}  // namespace specfilter::testing
