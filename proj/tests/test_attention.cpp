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

#include "oracles.hpp"
#include "specfilter/attention.hpp"
#include "specfilter/errors.hpp"

namespace specfilter {
namespace {

using testing::Gen;

TEST(CrossAttention, SingletonKeyReturnsValue) {
  Gen gen(41);
  const Matrix v = gen.matrix(1, 5);
  const Matrix out = cross_attention(gen.matrix(3, 4), gen.matrix(1, 4), v);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(out(i, j), v(0, j));
}

TEST(CrossAttention, HandSoftmax) {
  const Matrix out = cross_attention(Matrix{{1}}, Matrix{{1}, {1}}, Matrix{{2}, {4}});
  EXPECT_EQ(out, (Matrix{{3.0}}));
}

TEST(CrossAttention, ShiftInvariance) {
  // d = 1, q = 1: logits are the keys themselves; shifting every key by 7
  // shifts every logit by 7.
  const Matrix v{{1.0}, {-2.0}, {5.0}};
  const Matrix base = cross_attention(Matrix{{1}}, Matrix{{0.3}, {-1.2}, {2.0}}, v);
  const Matrix shifted = cross_attention(Matrix{{1}}, Matrix{{7.3}, {5.8}, {9.0}}, v);
  EXPECT_LE(max_abs_diff(base, shifted), 1e-12);
}

TEST(CrossAttention, WeightRowsSumToOne) {
  Gen gen(42);
  const Matrix w = attention_weights(gen.matrix(6, 8, 3.0), gen.matrix(10, 8, 3.0));
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (double x : w.row(i)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(CrossAttention, ShapeErrors) {
  EXPECT_THROW(cross_attention(Matrix(2, 3), Matrix(4, 2), Matrix(4, 1)), ShapeError);
  EXPECT_THROW(cross_attention(Matrix(2, 3), Matrix(4, 3), Matrix(3, 1)), ShapeError);
  EXPECT_THROW(cross_attention(Matrix(2, 3), Matrix(0, 3), Matrix(0, 1)), ShapeError);
}

TEST(JointAttention, AbsentStyleIsTextOnly) {
  Gen gen(43);
  const Matrix q = gen.matrix(4, 6), kt = gen.matrix(5, 6), vt = gen.matrix(5, 3);
  const Matrix text = cross_attention(q, kt, vt);
  EXPECT_TRUE(bit_identical(joint_attention({q, kt, vt, std::nullopt, std::nullopt}), text));
  EXPECT_TRUE(bit_identical(joint_attention({q, kt, vt, Matrix(0, 6), Matrix(0, 3)}), text));
  EXPECT_THROW(joint_attention({q, kt, vt, gen.matrix(2, 6), std::nullopt}), ShapeError);
  EXPECT_THROW(joint_attention({q, kt, vt, gen.matrix(2, 6), gen.matrix(3, 3)}), ShapeError);
}

TEST(JointAttention, SaturatedStyleKeysVanish) {
  // q > 0 and style keys at -1e6 drive the style logits to -infinity.
  const Matrix q{{1.0}, {0.5}};
  const Matrix kt{{0.2}, {-0.4}};
  const Matrix vt{{1.0, 2.0}, {3.0, -1.0}};
  const Matrix ks{{-1e6}, {-1e6}};
  const Matrix vs(2, 2);
  const Matrix joint = joint_attention({q, kt, vt, ks, vs});
  EXPECT_LE(max_abs_diff(joint, cross_attention(q, kt, vt)), 1e-6);
}

TEST(JointAttention, DuplicatedKeysRenormalize) {
  Gen gen(44);
  const Matrix q = gen.matrix(4, 6), kt = gen.matrix(5, 6), vt = gen.matrix(5, 3);
  EXPECT_LE(max_abs_diff(joint_attention({q, kt, vt, kt, vt}), cross_attention(q, kt, vt)), 1e-12);
}

TEST(AdapterAttention, ZeroWeightOrZeroValuesIsTextOnly) {
  Gen gen(45);
  const Matrix q = gen.matrix(4, 6), kt = gen.matrix(5, 6), vt = gen.matrix(5, 3);
  const Matrix ks = gen.matrix(7, 6), vs = gen.matrix(7, 3);
  const Matrix text = cross_attention(q, kt, vt);
  EXPECT_TRUE(bit_identical(adapter_attention(q, kt, vt, ks, vs, 1.0, 0.0), text));
  EXPECT_EQ(adapter_attention(q, kt, vt, ks, Matrix(7, 3), 1.0, 3.0), text);
}

TEST(AdapterAttention, DuplicatedPathwayDoubles) {
  Gen gen(46);
  const Matrix q = gen.matrix(4, 6), kt = gen.matrix(5, 6), vt = gen.matrix(5, 3);
  EXPECT_LE(max_abs_diff(adapter_attention(q, kt, vt, kt, vt, 1.0, 1.0), 2.0 * cross_attention(q, kt, vt)), 1e-12);
}

TEST(Attention, OutputsAreConvexCombinations) {
  Gen gen(47);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = gen.index(1, 6), tq = gen.index(1, 5), tt = gen.index(1, 5), ts = gen.index(1, 5);
    const std::size_t dv = gen.index(1, 4);
    const Matrix q = gen.matrix(tq, d, 2.0), kt = gen.matrix(tt, d, 2.0), vt = gen.matrix(tt, dv);
    const Matrix ks = gen.matrix(ts, d, 2.0), vs = gen.matrix(ts, dv);
    const Matrix vall = vstack(vt, vs);
    const Matrix out = joint_attention({q, kt, vt, ks, vs});
    for (std::size_t c = 0; c < dv; ++c) {
      double lo = vall(0, c), hi = vall(0, c);
      for (std::size_t r = 1; r < vall.rows(); ++r) {
        lo = std::min(lo, vall(r, c));
        hi = std::max(hi, vall(r, c));
      }
      for (std::size_t i = 0; i < tq; ++i) {
        EXPECT_GE(out(i, c), lo - 1e-12);
        EXPECT_LE(out(i, c), hi + 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace specfilter
