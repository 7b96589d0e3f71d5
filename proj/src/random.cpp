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

#include "specfilter/random.hpp"

#include <cmath>
#include <numbers>

#include "specfilter/errors.hpp"

namespace specfilter {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Matrix Rng::gaussian_matrix(std::size_t rows, std::size_t cols, double scale) {
  MatrixBuilder out(rows, cols);
  for (double& x : out.data()) x = scale * gaussian();
  return std::move(out).finish();
}

Matrix random_orthonormal(Rng& rng, std::size_t rows, std::size_t cols) {
  if (cols > rows) throw ConfigError("random_orthonormal: need cols <= rows");
  MatrixBuilder q(rng.gaussian_matrix(rows, cols));
  for (std::size_t j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double h = 0.0;
        for (std::size_t i = 0; i < rows; ++i) h += q(i, k) * q(i, j);
        for (std::size_t i = 0; i < rows; ++i) q(i, j) -= h * q(i, k);
      }
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) nrm += q(i, j) * q(i, j);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < rows; ++i) q(i, j) /= nrm;
  }
  return std::move(q).finish();
}

}  // namespace specfilter
