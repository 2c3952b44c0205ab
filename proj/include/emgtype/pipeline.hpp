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

#ifndef EMGTYPE_PIPELINE_HPP_
#define EMGTYPE_PIPELINE_HPP_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emgtype/charset.hpp"
#include "emgtype/decode.hpp"
#include "emgtype/encoder.hpp"
#include "emgtype/frontend.hpp"
#include "emgtype/lm.hpp"
#include "emgtype/metrics.hpp"
#include "emgtype/normalize.hpp"
#include "emgtype/session.hpp"

namespace emgtype {

struct PipelineConfig {
  StftOptions stft;
  RtnConfig rtn;
  DecodeConfig decode;
};

struct PipelineResult {
  std::string session_id;
  Keystrokes hypothesis;
  Keystrokes reference;
  std::optional<CerBreakdown> cer;  // empty when the session has no labels
  std::size_t frames = 0;
  double runtime_seconds = 0.0;
};

// STFT, then RSG when the model expects 6 bins, then RTN over the whole
// session. Returns [T x 2 x 16 x input_bins].
Tensor ComputeFeatures(const RawEmgWindow &window, std::size_t input_bins,
                       const PipelineConfig &config = {});

// Whole session in one pass.
Tensor SessionLogits(const SessionRecord &session, const Encoder &encoder,
                     const PipelineConfig &config = {});

// Greedy decoding without an LM, beam search with one.
Keystrokes DecodeLogits(const Tensor &logits, const CharLm *lm, const PipelineConfig &config,
                        const Charset &charset);

PipelineResult RunPipeline(const SessionRecord &session, const Encoder &encoder,
                           const PipelineConfig &config, const CharLm *lm,
                           const Charset &charset = Charset::Default());

// Sample-in, logits-out chain: StreamingStft, per-frame RSG, incremental
// RTN and StreamingEncoder. Logits are delayed by the RTN warm-up.
class StreamingPipeline {
 public:
  StreamingPipeline(std::shared_ptr<const Encoder> encoder, const PipelineConfig &config = {});

  // samples: [n x 2 x 16] flattened. Returns the logit rows that became ready.
  std::vector<std::vector<double>> Push(std::span<const double> samples);
  std::vector<std::vector<double>> Flush();

 private:
  std::vector<std::vector<double>> Advance(std::vector<std::vector<double>> spectra);

  std::shared_ptr<const Encoder> encoder_;
  StreamingStft stft_;
  std::optional<BandMap> band_map_;
  RollingNormalizer rtn_;
  StreamingEncoder stream_;
};

// Feeds a session through StreamingPipeline in chunks of `chunk_samples`.
Tensor StreamSessionLogits(const SessionRecord &session, std::shared_ptr<const Encoder> encoder,
                           const PipelineConfig &config = {}, std::size_t chunk_samples = 160);

PipelineResult RunStreamingPipeline(const SessionRecord &session,
                                    std::shared_ptr<const Encoder> encoder,
                                    const PipelineConfig &config, const CharLm *lm,
                                    const Charset &charset = Charset::Default(),
                                    std::size_t chunk_samples = 160);

}  // namespace emgtype

#endif  // EMGTYPE_PIPELINE_HPP_
