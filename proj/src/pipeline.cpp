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

#include "emgtype/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "emgtype/error.hpp"

namespace emgtype {

namespace {

std::optional<BandMap> BandMapFor(std::size_t input_bins, const StftOptions &stft) {
  if (input_bins == kReducedBands) return BuildBandMap(stft);
  if (input_bins == stft.num_bins()) return std::nullopt;
  ThrowUsage("model expects " + std::to_string(input_bins) + " bins per electrode; the frontend " +
             "provides " + std::to_string(stft.num_bins()) + " or " +
             std::to_string(kReducedBands));
}

void CheckCompatible(const Encoder &encoder, const PipelineConfig &config, const Charset &charset) {
  if (encoder.config().vocab_size != charset.size())
    ThrowUsage("model vocabulary " + std::to_string(encoder.config().vocab_size) +
               " does not match the charset size " + std::to_string(charset.size()));
  if (config.decode.blank_index != charset.blank_index())
    ThrowUsage("decode blank index does not match the charset");
}

PipelineResult Finish(const SessionRecord &session, const Tensor &logits, const CharLm *lm,
                      const PipelineConfig &config, const Charset &charset,
                      std::chrono::steady_clock::time_point start) {
  if (!logits.AllFinite()) ThrowNumeric("non-finite logits for session " + session.session_id);
  PipelineResult r;
  r.session_id = session.session_id;
  r.frames = logits.rank() ? logits.dim(0) : 0;
  r.hypothesis = DecodeLogits(logits, lm, config, charset);
  r.reference = session.LabelKeys();
  if (!r.reference.empty()) r.cer = ComputeCer(r.reference, r.hypothesis);
  r.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

Tensor ComputeFeatures(const RawEmgWindow &window, std::size_t input_bins,
                       const PipelineConfig &config) {
  const auto band_map = BandMapFor(input_bins, config.stft);
  Tensor spec = StftLogPower(window, config.stft);
  if (band_map) spec = AggregateRsg(spec, *band_map);
  return RtnBatch(spec, config.rtn);
}

Tensor SessionLogits(const SessionRecord &session, const Encoder &encoder,
                     const PipelineConfig &config) {
  const Tensor features =
      ComputeFeatures(session.ToWindow(), encoder.config().input_bins, config);
  return encoder.Forward(features);
}

Keystrokes DecodeLogits(const Tensor &logits, const CharLm *lm, const PipelineConfig &config,
                        const Charset &charset) {
  if (lm == nullptr) return GreedyDecode(logits, charset);
  return BeamSearch(logits, lm, config.decode, charset);
}

PipelineResult RunPipeline(const SessionRecord &session, const Encoder &encoder,
                           const PipelineConfig &config, const CharLm *lm,
                           const Charset &charset) {
  const auto start = std::chrono::steady_clock::now();
  CheckCompatible(encoder, config, charset);
  return Finish(session, SessionLogits(session, encoder, config), lm, config, charset, start);
}

StreamingPipeline::StreamingPipeline(std::shared_ptr<const Encoder> encoder,
                                     const PipelineConfig &config)
    : encoder_(std::move(encoder)),
      stft_(config.stft),
      band_map_(BandMapFor(encoder_->config().input_bins, config.stft)),
      rtn_(config.rtn, kNumElectrodes * encoder_->config().input_bins),
      stream_(encoder_) {}

std::vector<std::vector<double>> StreamingPipeline::Advance(
    std::vector<std::vector<double>> spectra) {
  std::vector<std::vector<double>> logits;
  for (auto &frame : spectra) {
    if (band_map_) frame = AggregateRsgFrame(frame, *band_map_);
    for (const auto &normalized : rtn_.Push(frame)) logits.push_back(stream_.Step(normalized));
  }
  return logits;
}

std::vector<std::vector<double>> StreamingPipeline::Push(std::span<const double> samples) {
  return Advance(stft_.Push(samples));
}

std::vector<std::vector<double>> StreamingPipeline::Flush() {
  auto logits = Advance(stft_.Flush());
  for (const auto &normalized : rtn_.Flush()) logits.push_back(stream_.Step(normalized));
  return logits;
}

Tensor StreamSessionLogits(const SessionRecord &session, std::shared_ptr<const Encoder> encoder,
                           const PipelineConfig &config, std::size_t chunk_samples) {
  session.Validate();
  if (chunk_samples == 0) ThrowUsage("chunk size must be positive");
  const std::size_t V = encoder->config().vocab_size;
  StreamingPipeline pipe(std::move(encoder), config);
  const std::vector<double> samples(session.emg.begin(), session.emg.end());
  std::vector<double> out;
  auto take = [&](const std::vector<std::vector<double>> &rows) {
    for (const auto &row : rows) out.insert(out.end(), row.begin(), row.end());
  };
  const std::size_t n = session.num_samples();
  for (std::size_t s = 0; s < n; s += chunk_samples) {
    const std::size_t len = std::min(chunk_samples, n - s);
    take(pipe.Push(std::span<const double>(samples).subspan(s * kNumElectrodes,
                                                            len * kNumElectrodes)));
  }
  take(pipe.Flush());
  const std::size_t T = out.size() / V;
  return Tensor({T, V}, std::move(out));
}

PipelineResult RunStreamingPipeline(const SessionRecord &session,
                                    std::shared_ptr<const Encoder> encoder,
                                    const PipelineConfig &config, const CharLm *lm,
                                    const Charset &charset, std::size_t chunk_samples) {
  const auto start = std::chrono::steady_clock::now();
  CheckCompatible(*encoder, config, charset);
  const Tensor logits = StreamSessionLogits(session, encoder, config, chunk_samples);
  return Finish(session, logits, lm, config, charset, start);
}

}  // namespace emgtype
