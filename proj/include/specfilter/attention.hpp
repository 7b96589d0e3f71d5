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

#include <optional>

#include "specfilter/matrix.hpp"

namespace specfilter {

// Token-major layout throughout: q is (tokens_q x d), k is (tokens_k x d),
// v is (tokens_k x d_v). Style K/V stored feature-major (d x N) must be
// transposed before they reach these functions.

/// Row-wise softmax(q k^T / sqrt(d)), shape tokens_q x tokens_k.
Matrix attention_weights(const Matrix& q, const Matrix& k);

/// softmax(q k^T / sqrt(d)) v. Softmax subtracts the row maximum first.
Matrix cross_attention(const Matrix& q, const Matrix& k, const Matrix& v);

struct AttentionInputs {
  Matrix q;
  Matrix k_text;
  Matrix v_text;
  std::optional<Matrix> k_style;
  std::optional<Matrix> v_style;
};

/// Single attention over the token-axis concatenation [k_text; k_style],
/// [v_text; v_style]. With the style pair absent (or zero tokens) this is
/// exactly cross_attention(q, k_text, v_text).
Matrix joint_attention(const AttentionInputs& in);

/// Decoupled adapter injection:
///   text_weight * attn(q, k_text, v_text) + style_weight * attn(q, k_style, v_style)
/// A zero style_weight skips the style term entirely.
Matrix adapter_attention(const Matrix& q, const Matrix& k_text, const Matrix& v_text, const Matrix& k_style,
                         const Matrix& v_style, double text_weight = 1.0, double style_weight = 1.0);

}  // namespace specfilter
