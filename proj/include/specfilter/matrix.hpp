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
#include <initializer_list>
#include <span>
#include <vector>

namespace specfilter {

/// Dense row-major matrix of doubles.
///
/// Immutable in spirit: every algebraic operation returns a new value. All
/// entries are finite; the public constructors reject NaN and Inf with a
/// DomainError. Zero-sized shapes (0 x n, n x 0) are allowed so that absent
/// token sets can be represented.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> values);
  // Column vector (n x 1).
  static Matrix column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::vector<double> col(std::size_t c) const;

  Matrix transpose() const;
  double frobenius_norm() const;
  double squared_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  friend class MatrixBuilder;
  struct Unchecked {};
  Matrix(Unchecked, std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {}

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Mutable staging area for building a Matrix entry by entry. finish()
/// validates finiteness once, at the end.
class MatrixBuilder {
 public:
  MatrixBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  explicit MatrixBuilder(const Matrix& m) : rows_(m.rows()), cols_(m.cols()), data_(m.data().begin(), m.data().end()) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<double> data() noexcept { return data_; }

  Matrix finish() &&;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

// Horizontal / vertical stacking. vstack is the token-axis concatenation used
// by joint attention ((n1 x d) over (n2 x d)).
Matrix vstack(const Matrix& top, const Matrix& bottom);
Matrix hstack(const Matrix& left, const Matrix& right);

// Frobenius inner product <a, b> = sum a_ij b_ij.
double frobenius_inner(const Matrix& a, const Matrix& b);

// ||a - b||_F / ||b||_F, or ||a - b||_F when b is zero.
double relative_error(const Matrix& a, const Matrix& b);

// Largest absolute entrywise difference.
double max_abs_diff(const Matrix& a, const Matrix& b);

// Bitwise equality of every entry (distinguishes +0.0 from -0.0).
bool bit_identical(const Matrix& a, const Matrix& b);

}  // namespace specfilter
