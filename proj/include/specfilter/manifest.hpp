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
#include <filesystem>
#include <string>
#include <vector>

#include "specfilter/matrix.hpp"

namespace specfilter {

struct ManifestLayer {
  std::string name;
  std::filesystem::path key_path;    // resolved against the manifest's directory
  std::filesystem::path value_path;
  std::size_t tokens = 0;  // N
  std::size_t dim = 0;     // d
};

struct EmbeddingManifest {
  std::vector<ManifestLayer> layers;
};

// Parses and validates a manifest. Unknown fields are rejected with a
// ConfigError listing every offending key; missing files raise IoError naming
// the path; tensors whose dims differ from (dim, tokens) raise ShapeError.
EmbeddingManifest load_manifest(const std::filesystem::path& path);

// Parse only (no file checks). base_dir resolves relative tensor paths.
EmbeddingManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir);

void validate_manifest(const EmbeddingManifest& manifest);

struct LayerKV {
  std::string name;
  Matrix key;    // d x N
  Matrix value;  // d x N
};

std::vector<LayerKV> load_layers(const EmbeddingManifest& manifest);

// Writes manifest.json next to the tensors, storing paths relative to dir.
void write_manifest(const std::filesystem::path& path, const EmbeddingManifest& manifest);

}  // namespace specfilter
