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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specfilter/matrix.hpp"

namespace specfilter {

// CSEM tensor file layout, all integers little-endian:
//
//   offset 0   magic   "CSEM"
//   offset 4   u16     version (1)
//   offset 6   u8      dtype   (0 = f64 IEEE-754 LE)
//   offset 7   u8      ndim
//   offset 8   u64[ndim] dims
//   then       f64[prod(dims)] payload, row-major
inline constexpr char kTensorMagic[4] = {'C', 'S', 'E', 'M'};
inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 0;

std::vector<std::uint8_t> encode_tensor(const Matrix& m);

// Accepts ndim 1 (read as n x 1) or 2. Throws FormatError carrying the byte
// offset of the first inconsistency.
Matrix decode_tensor(std::span<const std::uint8_t> bytes);

Matrix read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Matrix& m);

}  // namespace specfilter
