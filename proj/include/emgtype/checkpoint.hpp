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

#ifndef EMGTYPE_CHECKPOINT_HPP_
#define EMGTYPE_CHECKPOINT_HPP_

#include <string>

#include "emgtype/encoder.hpp"

namespace emgtype {

struct Checkpoint {
  ModelConfig config;
  WeightStore weights;
};

// Layout:
//   "EMGCKPT 1\n"
//   "<manifest byte length>\n"
//   <JSON manifest: {"config": {...}, "payload_bytes": N,
//                    "tensors": [{"name", "shape", "dtype": "f32", "offset"}]}>
//   "\n"
//   <payload: little-endian float32 tensors, row-major>
// Shared tensors appear once in the payload; both names carry its offset.
std::string SerializeCheckpoint(const ModelConfig &config, const WeightStore &weights);
Checkpoint ParseCheckpoint(const std::string &bytes);

void SaveCheckpoint(const ModelConfig &config, const WeightStore &weights,
                    const std::string &path);
Checkpoint LoadCheckpoint(const std::string &path);

std::string ConfigToJson(const ModelConfig &config);
ModelConfig ConfigFromJson(const std::string &text);

}  // namespace emgtype

#endif  // EMGTYPE_CHECKPOINT_HPP_
