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

#include "specfilter/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "specfilter/errors.hpp"

namespace specfilter {

namespace {

constexpr std::size_t kHeaderFixed = 8;

template <typename UInt>
void put_le(std::vector<std::uint8_t>& out, UInt v) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename UInt>
UInt get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Matrix& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderFixed + 16 + 8 * m.size());
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  put_le<std::uint16_t>(out, kTensorVersion);
  out.push_back(kDtypeF64);
  out.push_back(2);
  put_le<std::uint64_t>(out, m.rows());
  put_le<std::uint64_t>(out, m.cols());
  for (double x : m.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  return out;
}

Matrix decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderFixed) throw FormatError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), kTensorMagic, 4) != 0) throw FormatError("bad magic, expected \"CSEM\"", 0);
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kTensorVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::uint8_t dtype = bytes[6];
  if (dtype != kDtypeF64) throw FormatError("unsupported dtype " + std::to_string(dtype), 6);
  const std::uint8_t ndim = bytes[7];
  if (ndim != 1 && ndim != 2) {
    throw FormatError("matrix tensors need ndim 1 or 2, got " + std::to_string(ndim), 7);
  }

  const std::size_t dims_end = kHeaderFixed + 8 * std::size_t{ndim};
  if (bytes.size() < dims_end) throw FormatError("truncated dims", bytes.size());
  std::uint64_t dims[2] = {0, 1};
  for (std::size_t i = 0; i < ndim; ++i) dims[i] = get_le<std::uint64_t>(bytes, kHeaderFixed + 8 * i);

  constexpr auto kMax = std::numeric_limits<std::size_t>::max() / 8;
  if (dims[1] != 0 && dims[0] > kMax / dims[1]) throw FormatError("dims overflow", kHeaderFixed);
  const std::size_t count = dims[0] * dims[1];
  const std::size_t expected = dims_end + 8 * count;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload: need " + std::to_string(8 * count) + " bytes, have " +
                          std::to_string(bytes.size() - dims_end),
                      bytes.size());
  }
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload", expected);

  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = dims_end + 8 * i;
    data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, off));
    if (!std::isfinite(data[i])) throw FormatError("non-finite payload value", off);
  }
  return Matrix(dims[0], dims[1], std::move(data));
}

Matrix read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.detail(), e.offset());
  }
}

void write_tensor(const std::filesystem::path& path, const Matrix& m) {
  const auto bytes = encode_tensor(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace specfilter
