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

#include "specfilter/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "specfilter/errors.hpp"

namespace specfilter {

namespace {

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void check_qkv(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (q.cols() != k.cols()) throw ShapeError("attention: q is " + dims(q) + " but k is " + dims(k));
  if (k.rows() != v.rows()) throw ShapeError("attention: k is " + dims(k) + " but v is " + dims(v));
  if (k.rows() == 0) throw ShapeError("attention: at least one key token is required");
  if (q.cols() == 0) throw ShapeError("attention: feature dimension must be positive");
}

// Softmax weights for one query row, written into w.
void row_weights(const Matrix& q, const Matrix& k, std::size_t i, double scale, std::vector<double>& w) {
  const auto qi = q.row(i);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k.rows(); ++j) {
    const auto kj = k.row(j);
    double logit = 0.0;
    for (std::size_t c = 0; c < qi.size(); ++c) logit += qi[c] * kj[c];
    w[j] = logit * scale;
    top = std::max(top, w[j]);
  }
  double total = 0.0;
  for (double& x : w) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : w) x /= total;
}

}  // namespace

Matrix attention_weights(const Matrix& q, const Matrix& k) {
  if (q.cols() != k.cols()) throw ShapeError("attention: q is " + dims(q) + " but k is " + dims(k));
  if (k.rows() == 0) throw ShapeError("attention: at least one key token is required");
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  MatrixBuilder out(q.rows(), k.rows());
  std::vector<double> w(k.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    row_weights(q, k, i, scale, w);
    std::copy(w.begin(), w.end(), &out(i, 0));
  }
  return std::move(out).finish();
}

Matrix cross_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  check_qkv(q, k, v);
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  MatrixBuilder out(q.rows(), v.cols());
  std::vector<double> w(k.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    row_weights(q, k, i, scale, w);
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const auto vj = v.row(j);
      for (std::size_t c = 0; c < v.cols(); ++c) out(i, c) += w[j] * vj[c];
    }
  }
  return std::move(out).finish();
}

Matrix joint_attention(const AttentionInputs& in) {
  if (in.k_style.has_value() != in.v_style.has_value()) {
    throw ShapeError("joint_attention: style keys and values must be given together");
  }
  if (!in.k_style || (in.k_style->rows() == 0 && in.v_style->rows() == 0)) {
    return cross_attention(in.q, in.k_text, in.v_text);
  }
  if (in.k_style->rows() != in.v_style->rows()) {
    throw ShapeError("joint_attention: style keys " + dims(*in.k_style) + " vs values " + dims(*in.v_style));
  }
  return cross_attention(in.q, vstack(in.k_text, *in.k_style), vstack(in.v_text, *in.v_style));
}

Matrix adapter_attention(const Matrix& q, const Matrix& k_text, const Matrix& v_text, const Matrix& k_style,
                         const Matrix& v_style, double text_weight, double style_weight) {
  check_qkv(q, k_style, v_style);
  if (v_style.cols() != v_text.cols()) {
    throw ShapeError("adapter_attention: text values " + dims(v_text) + " vs style values " + dims(v_style));
  }
  Matrix text = cross_attention(q, k_text, v_text);
  if (text_weight != 1.0) text = text_weight * text;
  if (style_weight == 0.0) return text;
  return text + style_weight * cross_attention(q, k_style, v_style);
}

}  // namespace specfilter
