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

#include <cmath>
#include <string>

#include "emgtype/encoder.hpp"
#include "emgtype/error.hpp"

namespace emgtype {

std::uint64_t CountParams(const ModelConfig &config) {
  std::uint64_t total = 0;
  for (const TensorSpec &spec : ExpectedTensors(config))
    if (!spec.alias_of) total += NumElements(spec.shape);
  return total;
}

FlopReport CountFlops(const ModelConfig &config, double input_seconds,
                      FlopConvention convention) {
  config.Validate();
  if (!(input_seconds >= 0.0) || !std::isfinite(input_seconds))
    ThrowUsage("input_seconds must be a non-negative number");
  FlopReport report;
  long frames = 0;
  if (convention == FlopConvention::kEngine) {
    frames = static_cast<long>(std::ceil(input_seconds * 125.0 - 1e-9));
  } else {
    const long samples = std::lround(input_seconds * 2000.0);
    frames = samples >= 64 ? (samples - 64) / 16 + 1 : 0;
  }
  report.input_frames = static_cast<std::size_t>(std::max(frames, 0L));
  if (frames <= 0) return report;

  const std::uint64_t num_offsets = config.offsets.size();
  std::uint64_t mlp_per_frame = 0;
  std::size_t in = config.mlp_input_width();
  for (std::size_t out : config.mlp_layer_sizes) {
    mlp_per_frame += static_cast<std::uint64_t>(in) * out;
    in = out;
  }
  mlp_per_frame *= num_offsets * 2;  // both hands
  std::uint64_t macs = mlp_per_frame * frames;

  const std::uint64_t D = config.stack_width();
  const std::uint64_t streams = config.num_streams();
  const std::uint64_t w = config.kernel_width;
  long t = frames;
  for (std::size_t K : config.block_channels) {
    if (convention == FlopConvention::kReference) t -= static_cast<long>(w) - 1;
    if (t <= 0) {
      t = 0;
      break;
    }
    const std::uint64_t H = D / K;
    const std::uint64_t conv = static_cast<std::uint64_t>(K) * K * w * H;
    const std::uint64_t fc = 2 * D * D;
    macs += streams * (conv + fc) * static_cast<std::uint64_t>(t);
  }
  macs += static_cast<std::uint64_t>(2 * config.embed_dim) * config.vocab_size *
          static_cast<std::uint64_t>(t);
  report.macs = macs;
  return report;
}

}  // namespace emgtype
