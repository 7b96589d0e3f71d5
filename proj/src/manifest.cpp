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

#include "specfilter/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specfilter/errors.hpp"
#include "specfilter/tensor_io.hpp"

namespace specfilter {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  std::vector<std::string> unknown;
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) unknown.push_back(key);
  }
  if (unknown.empty()) return;
  std::string list;
  for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
  throw ConfigError(where + ": unknown field(s): " + list);
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

EmbeddingManifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("manifest: top level must be an object");
  reject_unknown(doc, {"layers"}, "manifest");
  const auto layers = doc.find("layers");
  if (layers == doc.end() || !layers->is_array()) throw ConfigError("manifest: 'layers' must be an array");

  EmbeddingManifest out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < layers->size(); ++i) {
    const auto& entry = (*layers)[i];
    const std::string where = "manifest.layers[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw ConfigError(where + ": must be an object");
    reject_unknown(entry, {"name", "key_path", "value_path", "tokens", "dim"}, where);
    ManifestLayer layer;
    layer.name = require<std::string>(entry, "name", where);
    if (layer.name.empty() || layer.name.find_first_of("/\\") != std::string::npos) {
      throw ConfigError(where + ": layer name must be non-empty and contain no path separators");
    }
    if (!seen.insert(layer.name).second) throw ConfigError(where + ": duplicate layer name " + layer.name);
    layer.key_path = base_dir / require<std::string>(entry, "key_path", where);
    layer.value_path = base_dir / require<std::string>(entry, "value_path", where);
    layer.tokens = require<std::size_t>(entry, "tokens", where);
    layer.dim = require<std::size_t>(entry, "dim", where);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

void validate_manifest(const EmbeddingManifest& manifest) {
  for (const auto& layer : manifest.layers) {
    for (const auto* path : {&layer.key_path, &layer.value_path}) {
      if (!std::filesystem::exists(*path)) {
        throw IoError("layer " + layer.name + ": missing tensor file " + path->string());
      }
      const Matrix m = read_tensor(*path);
      if (m.rows() != layer.dim || m.cols() != layer.tokens) {
        throw ShapeError("layer " + layer.name + ": " + path->string() + " has dims " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", manifest declares " + std::to_string(layer.dim) + "x" +
                         std::to_string(layer.tokens));
      }
    }
  }
}

EmbeddingManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto manifest = parse_manifest(buf.str(), path.parent_path());
  validate_manifest(manifest);
  return manifest;
}

std::vector<LayerKV> load_layers(const EmbeddingManifest& manifest) {
  std::vector<LayerKV> out;
  out.reserve(manifest.layers.size());
  for (const auto& layer : manifest.layers) {
    out.push_back({layer.name, read_tensor(layer.key_path), read_tensor(layer.value_path)});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const EmbeddingManifest& manifest) {
  const auto dir = path.parent_path();
  json layers = json::array();
  for (const auto& layer : manifest.layers) {
    layers.push_back({{"name", layer.name},
                      {"key_path", layer.key_path.lexically_relative(dir).generic_string()},
                      {"value_path", layer.value_path.lexically_relative(dir).generic_string()},
                      {"tokens", layer.tokens},
                      {"dim", layer.dim}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << json{{"layers", layers}}.dump(2) << "\n";
}

}  // namespace specfilter
