// Copyright 2026 The emgtype Authors
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

#include "emgtype/checkpoint.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "emgtype/error.hpp"
#include "emgtype/session.hpp"
#include "json.hpp"

namespace emgtype {

namespace {

using nlohmann::json;

constexpr const char *kMagic = "EMGCKPT";
constexpr int kVersion = 1;

json ConfigJson(const ModelConfig &c) {
  return json{{"variant", VariantName(c.variant)},
              {"embed_dim", c.embed_dim},
              {"block_channels", c.block_channels},
              {"kernel_width", c.kernel_width},
              {"mlp_layer_sizes", c.mlp_layer_sizes},
              {"offsets", c.offsets},
              {"vocab_size", c.vocab_size},
              {"input_bins", c.input_bins},
              {"layer_norm_eps", c.layer_norm_eps}};
}

ModelConfig ConfigFrom(const json &j) {
  ModelConfig c;
  try {
    c.variant = ParseVariant(j.at("variant").get<std::string>());
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.block_channels = j.at("block_channels").get<std::vector<std::size_t>>();
    c.kernel_width = j.at("kernel_width").get<std::size_t>();
    c.mlp_layer_sizes = j.at("mlp_layer_sizes").get<std::vector<std::size_t>>();
    c.offsets = j.at("offsets").get<std::vector<int>>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.input_bins = j.at("input_bins").get<std::size_t>();
    c.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  } catch (const json::exception &e) {
    ThrowData(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

}  // namespace

std::string ConfigToJson(const ModelConfig &config) { return ConfigJson(config).dump(); }

ModelConfig ConfigFromJson(const std::string &text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) ThrowData("model config: invalid JSON");
  return ConfigFrom(j);
}

std::string SerializeCheckpoint(const ModelConfig &config, const WeightStore &weights) {
  ValidateWeights(config, weights);
  json tensors = json::array();
  std::map<const Tensor *, std::size_t> offsets;
  std::string payload;
  for (const TensorSpec &spec : ExpectedTensors(config)) {
    const auto ptr = weights.Ptr(spec.name);
    auto it = offsets.find(ptr.get());
    if (it == offsets.end()) {
      it = offsets.emplace(ptr.get(), payload.size()).first;
      for (double v : ptr->values()) AppendFloat32LE(payload, static_cast<float>(v));
    }
    tensors.push_back(
        {{"name", spec.name}, {"shape", spec.shape}, {"dtype", "f32"}, {"offset", it->second}});
  }
  const json manifest{
      {"config", ConfigJson(config)}, {"payload_bytes", payload.size()}, {"tensors", tensors}};
  const std::string text = manifest.dump();
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n' << text.size() << '\n' << text << '\n';
  return out.str() + payload;
}

Checkpoint ParseCheckpoint(const std::string &bytes) {
  std::istringstream head(bytes);
  std::string magic;
  int version = 0;
  std::size_t manifest_len = 0;
  if (!(head >> magic) || magic != kMagic) ThrowData("not a checkpoint file");
  if (!(head >> version) || version != kVersion)
    ThrowData("unsupported checkpoint version " + std::to_string(version));
  if (!(head >> manifest_len) || head.get() != '\n') ThrowData("checkpoint: malformed header");
  const std::size_t manifest_start = static_cast<std::size_t>(head.tellg());
  if (manifest_start + manifest_len + 1 > bytes.size()) ThrowData("checkpoint: truncated manifest");
  if (bytes[manifest_start + manifest_len] != '\n') ThrowData("checkpoint: malformed manifest");

  json manifest = json::parse(bytes.substr(manifest_start, manifest_len), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) ThrowData("checkpoint: invalid manifest JSON");

  Checkpoint ckpt;
  ckpt.config = ConfigFrom(manifest.value("config", json::object()));
  const std::size_t payload_start = manifest_start + manifest_len + 1;
  const std::size_t actual = bytes.size() - payload_start;
  const std::size_t declared = manifest.value("payload_bytes", actual);
  if (declared != actual) {
    ThrowData("checkpoint: truncated payload: expected " + std::to_string(declared) +
              " bytes, got " + std::to_string(actual));
  }

  std::map<std::size_t, std::string> by_offset;
  try {
    for (const json &entry : manifest.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (entry.value("dtype", "f32") != "f32")
        ThrowData("checkpoint: tensor '" + name + "' has unsupported dtype");
      if (ckpt.weights.Has(name)) ThrowData("checkpoint: duplicate tensor '" + name + "'");
      if (auto it = by_offset.find(offset); it != by_offset.end()) {
        if (ckpt.weights.Get(it->second).shape() != shape)
          ThrowData("checkpoint: tensors '" + name + "' and '" + it->second +
                    "' share storage but differ in shape");
        ckpt.weights.Alias(name, it->second);
        continue;
      }
      const std::size_t n = NumElements(shape);
      if (offset > actual || n * 4 > actual - offset)
        ThrowData("checkpoint: tensor '" + name + "' lies outside the payload");
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = ReadFloat32LE(&bytes[payload_start + offset + 4 * i]);
        if (std::isnan(values[i])) ThrowNumeric("checkpoint: NaN in tensor '" + name + "'");
      }
      ckpt.weights.Set(name, Tensor(shape, std::move(values)));
      by_offset.emplace(offset, name);
    }
  } catch (const json::exception &e) {
    ThrowData(std::string("checkpoint: malformed tensor directory: ") + e.what());
  }
  ValidateWeights(ckpt.config, ckpt.weights);
  return ckpt;
}

void SaveCheckpoint(const ModelConfig &config, const WeightStore &weights,
                    const std::string &path) {
  WriteFileBytes(path, SerializeCheckpoint(config, weights));
}

Checkpoint LoadCheckpoint(const std::string &path) { return ParseCheckpoint(ReadFileBytes(path)); }

}  // namespace emgtype
