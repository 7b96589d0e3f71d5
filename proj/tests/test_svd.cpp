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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "specfilter/errors.hpp"
#include "specfilter/svd.hpp"

namespace specfilter {
namespace {

using testing::Gen;
using testing::orthogonality_defect;

void expect_factor_invariants(const Matrix& x, const SvdFactors& f) {
  const std::size_t r = std::min(x.rows(), x.cols());
  ASSERT_EQ(f.sigma.size(), r);
  ASSERT_EQ(f.u.rows(), x.rows());
  ASSERT_EQ(f.u.cols(), r);
  ASSERT_EQ(f.v.rows(), x.cols());
  ASSERT_EQ(f.v.cols(), r);
  for (std::size_t i = 0; i < r; ++i) {
    EXPECT_GE(f.sigma[i], 0.0);
    if (i > 0) EXPECT_LE(f.sigma[i], f.sigma[i - 1]);
  }
  EXPECT_LE(orthogonality_defect(f.u), 1e-10);
  EXPECT_LE(orthogonality_defect(f.v), 1e-10);
  EXPECT_LE(relative_error(reconstruct(f), x), 1e-10);
}

TEST(Svd, Diagonal) {
  const Matrix x{{3, 0}, {0, 2}};
  const auto f = svd(x);
  EXPECT_EQ(f.sigma, (std::vector<double>{3, 2}));
  EXPECT_EQ(reconstruct(f), x);
}

TEST(Svd, DiagonalUnsortedInput) {
  const Matrix x{{1, 0, 0}, {0, 4, 0}};
  const auto f = svd(x);
  EXPECT_EQ(f.sigma, (std::vector<double>{4, 1}));
  expect_factor_invariants(x, f);
}

TEST(Svd, ZeroMatrix) {
  const Matrix x(3, 2);
  const auto f = svd(x);
  EXPECT_EQ(f.sigma, (std::vector<double>{0, 0}));
  expect_factor_invariants(x, f);
}

TEST(Svd, EmptyInputIsDomainError) { EXPECT_THROW(svd(Matrix(0, 3)), DomainError); }

TEST(Svd, SingleColumnAndRow) {
  const Matrix col{{3}, {4}};
  EXPECT_NEAR(svd(col).sigma[0], 5.0, 1e-15);
  expect_factor_invariants(col, svd(col));
  expect_factor_invariants(col.transpose(), svd(col.transpose()));
}

TEST(Svd, MatchesGramEigenOracle) {
  Gen gen(3);
  const Matrix x = gen.matrix(5, 3);
  const auto f = svd(x);
  const auto ev = testing::gram_eigenvalues(x);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(f.sigma[i] * f.sigma[i], ev[i], 1e-8);
}

TEST(Svd, ReconstructIdentity) {
  const auto f = svd(Matrix::identity(4));
  EXPECT_LE(max_abs_diff(reconstruct(f), Matrix::identity(4)), 1e-12);
}

TEST(Svd, ReconstructZeroSpectrum) {
  auto f = svd(Matrix{{1, 2}, {3, 4}, {5, 6}});
  std::fill(f.sigma.begin(), f.sigma.end(), 0.0);
  EXPECT_EQ(reconstruct(f), Matrix(3, 2));
}

TEST(Svd, ReconstructShapeMismatch) {
  auto f = svd(Matrix{{1, 2}, {3, 4}});
  f.sigma.push_back(1.0);
  EXPECT_THROW(reconstruct(f), ShapeError);
}

TEST(Svd, SelfConsistencySweep) {
  Gen gen(100);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix x = gen.matrix(8, 6);
    expect_factor_invariants(x, svd(x));
  }
}

TEST(Svd, RankDeficientAndTied) {
  Gen gen(101);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix low = gen.low_rank(9, 7, 1 + trial % 4);
    expect_factor_invariants(low, svd(low));
    const Matrix tied = gen.with_spectrum(7, 9, {3.0, 3.0, 3.0, 1.0, 1.0});
    const auto f = svd(tied);
    expect_factor_invariants(tied, f);
    EXPECT_NEAR(f.sigma[0], 3.0, 1e-12);
    EXPECT_NEAR(f.sigma[2], 3.0, 1e-12);
    EXPECT_NEAR(f.sigma[4], 1.0, 1e-12);
    EXPECT_LE(f.sigma[5], 1e-12);
  }
}

TEST(Svd, ScaleEquivariance) {
  Gen gen(102);
  const Matrix x = gen.matrix(6, 4);
  const auto base = svd(x).sigma;
  for (double c : {-2.0, 0.5, 10.0}) {
    const auto scaled = svd(c * x).sigma;
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_NEAR(scaled[i], std::abs(c) * base[i], 1e-10 * std::abs(c) * base[0]);
    }
  }
}

TEST(Svd, ColumnPermutationInvariance) {
  Gen gen(103);
  const Matrix x = gen.matrix(5, 6);
  std::vector<std::size_t> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[1], perm[4]);
  MatrixBuilder permuted(5, 6);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 6; ++j) permuted(i, j) = x(i, perm[j]);
  const auto a = svd(x).sigma;
  const auto b = svd(std::move(permuted).finish()).sigma;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10 * a[0]);
}

TEST(Svd, RankOneOuterProduct) {
  Gen gen(104);
  const Matrix a = gen.matrix(7, 1);
  const Matrix b = gen.matrix(5, 1);
  const auto f = svd(matmul(a, b.transpose()));
  EXPECT_NEAR(f.sigma[0], a.frobenius_norm() * b.frobenius_norm(), 1e-12 * f.sigma[0]);
  for (std::size_t i = 1; i < f.sigma.size(); ++i) EXPECT_LE(f.sigma[i], 1e-10 * f.sigma[0]);
}

TEST(Svd, Deterministic) {
  Gen gen(105);
  const Matrix x = gen.matrix(12, 9);
  const auto a = svd(x);
  const auto b = svd(x);
  EXPECT_TRUE(bit_identical(a.u, b.u));
  EXPECT_TRUE(bit_identical(a.v, b.v));
  EXPECT_EQ(a.sigma, b.sigma);
}

TEST(Svd, SweepBudgetExhaustion) {
  Gen gen(106);
  const Matrix x = gen.matrix(10, 8);
  try {
    svd(x, SvdOptions{1});
    FAIL() << "one sweep should not converge on a dense random matrix";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

}  // namespace
}  // namespace specfilter
