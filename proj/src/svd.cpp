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

#include "specfilter/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "specfilter/errors.hpp"

namespace specfilter {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Column-major scratch matrix; one-sided Jacobi only ever touches whole
// columns.
struct Columns {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> data;

  Columns(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void rotate(double* a, double* b, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = a[i];
    const double bi = b[i];
    a[i] = c * ai - s * bi;
    b[i] = s * ai + c * bi;
  }
}

// Projects out the first `count` (orthonormal) columns of q from x.
void project_out(const Columns& q, std::size_t count, double* x) {
  for (std::size_t k = 0; k < count; ++k) {
    const double* qk = q.col(k);
    const double h = dot(qk, x, q.rows);
    for (std::size_t i = 0; i < q.rows; ++i) x[i] -= h * qk[i];
  }
}

// Re-orthonormalizes columns in order. Columns flagged as unusable, or that
// collapse under projection, are replaced by the first canonical basis vector
// that survives projection. Two passes of modified Gram-Schmidt keep the
// result orthonormal to working precision.
void orthonormalize(Columns& q, const std::vector<bool>& usable) {
  std::size_t next_unit = 0;
  std::vector<double> cand(q.rows);
  for (std::size_t j = 0; j < q.cols; ++j) {
    double* qj = q.col(j);
    bool ok = usable[j];
    if (ok) {
      for (int pass = 0; pass < 2; ++pass) project_out(q, j, qj);
      const double nrm = std::sqrt(dot(qj, qj, q.rows));
      ok = nrm > 0.5;
      if (ok) {
        for (std::size_t i = 0; i < q.rows; ++i) qj[i] /= nrm;
      }
    }
    while (!ok) {
      if (next_unit >= q.rows) throw ConvergenceError("svd: could not complete orthonormal basis", 1.0);
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[next_unit++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) project_out(q, j, cand.data());
      const double nrm = std::sqrt(dot(cand.data(), cand.data(), q.rows));
      if (nrm > 0.5) {
        for (std::size_t i = 0; i < q.rows; ++i) qj[i] = cand[i] / nrm;
        ok = true;
      }
    }
  }
}

Matrix to_matrix(const Columns& c) {
  MatrixBuilder out(c.rows, c.cols);
  for (std::size_t j = 0; j < c.cols; ++j)
    for (std::size_t i = 0; i < c.rows; ++i) out(i, j) = c.col(j)[i];
  return std::move(out).finish();
}

void check_factor_shapes(const SvdFactors& f, std::size_t r) {
  if (f.u.cols() != r || f.v.cols() != r) {
    throw ShapeError("reconstruct: factor shapes disagree (u " + std::to_string(f.u.rows()) + "x" +
                     std::to_string(f.u.cols()) + ", v " + std::to_string(f.v.rows()) + "x" +
                     std::to_string(f.v.cols()) + ", " + std::to_string(r) + " singular values)");
  }
}

}  // namespace

SvdFactors svd(const Matrix& x, const SvdOptions& options) {
  if (x.rows() == 0 || x.cols() == 0) throw DomainError("svd: input must have at least one row and column");

  // Work on the tall orientation so the column count (and therefore the
  // number of Jacobi pairs) is min(m, n).
  const bool transposed = x.rows() < x.cols();
  const std::size_t p = transposed ? x.cols() : x.rows();
  const std::size_t q = transposed ? x.rows() : x.cols();

  Columns a(p, q);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (transposed) a.col(i)[j] = x(i, j);
      else a.col(j)[i] = x(i, j);
    }
  Columns v(q, q);
  for (std::size_t j = 0; j < q; ++j) v.col(j)[j] = 1.0;

  const double fro2 = x.squared_norm();
  const double tol = std::max<double>(static_cast<double>(p), 1.0) * kEps;

  bool converged = fro2 == 0.0;
  double residual = 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    residual = 0.0;
    for (std::size_t i = 0; i + 1 < q; ++i) {
      for (std::size_t j = i + 1; j < q; ++j) {
        double* ai = a.col(i);
        double* aj = a.col(j);
        const double alpha = dot(ai, ai, p);
        const double beta = dot(aj, aj, p);
        const double gamma = dot(ai, aj, p);
        residual = std::max(residual, std::abs(gamma) / fro2);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;

        // Rotation zeroing the (i, j) entry of a^T a.
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        rotate(ai, aj, p, c, s);
        rotate(v.col(i), v.col(j), q, c, s);
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw ConvergenceError("svd: Jacobi sweep budget of " + std::to_string(options.max_sweeps) + " exhausted",
                           residual);
  }

  std::vector<double> norms(q);
  for (std::size_t j = 0; j < q; ++j) norms[j] = std::sqrt(dot(a.col(j), a.col(j), p));
  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return norms[l] > norms[r]; });

  const double sigma_max = norms[order[0]];
  const double rank_floor = tol * sigma_max;

  SvdFactors out;
  out.sigma.resize(q);
  Columns left(p, q);
  Columns right(q, q);
  std::vector<bool> usable(q);
  for (std::size_t k = 0; k < q; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    usable[k] = norms[j] > rank_floor && norms[j] > 0.0;
    if (usable[k]) {
      for (std::size_t i = 0; i < p; ++i) left.col(k)[i] = a.col(j)[i] / norms[j];
    }
    std::copy(v.col(j), v.col(j) + q, right.col(k));
  }
  orthonormalize(left, usable);

  if (transposed) {
    out.u = to_matrix(right);
    out.v = to_matrix(left);
  } else {
    out.u = to_matrix(left);
    out.v = to_matrix(right);
  }
  return out;
}

Matrix reconstruct(const SvdFactors& f) { return reconstruct(f, f.sigma); }

Matrix reconstruct(const SvdFactors& f, std::span<const double> sigma) {
  check_factor_shapes(f, sigma.size());
  const std::size_t m = f.u.rows();
  const std::size_t n = f.v.rows();
  const std::size_t r = sigma.size();
  MatrixBuilder out(m, n);
  for (std::size_t k = 0; k < r; ++k) {
    if (sigma[k] == 0.0) continue;
    for (std::size_t i = 0; i < m; ++i) {
      const double us = f.u(i, k) * sigma[k];
      for (std::size_t j = 0; j < n; ++j) out(i, j) += us * f.v(j, k);
    }
  }
  return std::move(out).finish();
}

}  // namespace specfilter
