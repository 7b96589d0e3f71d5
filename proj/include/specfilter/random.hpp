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

#include <cstdint>
#include <random>

#include "specfilter/matrix.hpp"

namespace specfilter {

// mt19937_64 has a fully specified output sequence, so raw draws are
// identical on every conforming platform. Uniform and Gaussian variates are
// derived here rather than through <random> distributions, whose algorithms
// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller.
  double gaussian();

  Matrix gaussian_matrix(std::size_t rows, std::size_t cols, double scale = 1.0);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// rows x cols matrix with orthonormal columns (cols <= rows), from Gram-Schmidt
// orthonormalization of a Gaussian draw.
Matrix random_orthonormal(Rng& rng, std::size_t rows, std::size_t cols);

}  // namespace specfilter
