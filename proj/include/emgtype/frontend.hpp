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

#ifndef EMGTYPE_FRONTEND_HPP_
#define EMGTYPE_FRONTEND_HPP_

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "emgtype/tensor.hpp"

namespace emgtype {

inline constexpr int kSampleRateHz = 2000;
inline constexpr std::size_t kNumBands = 2;      // wristbands (hands)
inline constexpr std::size_t kNumChannels = 16;  // electrodes per band
inline constexpr std::size_t kNumElectrodes = kNumBands * kNumChannels;
inline constexpr std::size_t kFullBins = 33;
inline constexpr std::size_t kReducedBands = 6;
inline constexpr double kLogPowerFloor = 1e-6;

// Raw EMG, samples laid out [T_samples x band x channel].
struct RawEmgWindow {
  Tensor samples;
  int sample_rate_hz = kSampleRateHz;

  std::size_t num_samples() const { return samples.rank() ? samples.dim(0) : 0; }
};

// Validates shape and rate; throws on anything not 2 x 16 at 2 kHz.
void CheckRawWindow(const RawEmgWindow &window);

enum class WindowFunction { kRectangular, kHann };

struct StftOptions {
  int n_fft = 64;
  int hop = 16;
  WindowFunction window = WindowFunction::kRectangular;

  std::size_t num_bins() const { return static_cast<std::size_t>(n_fft) / 2 + 1; }
};

// Causal log10-power STFT. Frame t spans samples [hop*t + hop - n_fft,
// hop*t + hop - 1]; samples before 0 or past the end read as zero, so there
// is exactly one frame per hop and no lookahead. Output is
// [T_frames x band x channel x bin] with T_frames = ceil(T_samples / hop).
Tensor StftLogPower(const RawEmgWindow &window, const StftOptions &opts = {});

// Frame-at-a-time counterpart of StftLogPower. Feeding the same samples in
// any chunking and calling Flush() yields the same frames.
class StreamingStft {
 public:
  explicit StreamingStft(const StftOptions &opts = {});
  ~StreamingStft();
  StreamingStft(StreamingStft &&) noexcept;
  StreamingStft &operator=(StreamingStft &&) noexcept;

  // `samples` is [n x band x channel] flattened; n may be zero.
  // Returns every frame that became complete, each [band x channel x bin].
  std::vector<std::vector<double>> Push(std::span<const double> samples);
  // Emits the trailing partially filled frame, if any.
  std::vector<std::vector<double>> Flush();

  std::size_t frames_emitted() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Assignment of FFT bins to the six log-spaced bands.
struct BandMap {
  // Band edges in Hz, lower and upper.
  std::array<std::array<double, 2>, kReducedBands> edges_hz{};
  // bin -> band index, -1 for unassigned (DC).
  std::vector<int> bin_to_band;

  std::array<int, kReducedBands> Populations() const;
  // Bins belonging to `band`, ascending.
  std::vector<std::size_t> Members(std::size_t band) const;
};

// Bins with center frequency in (lower, upper] join a band; the first band
// also accepts its lower edge. Bin 0 is left out.
BandMap BuildBandMap(const StftOptions &opts = {}, int sample_rate_hz = kSampleRateHz);

// Sums member-bin log powers per band along the last axis (33 -> 6).
// Works for any leading shape.
Tensor AggregateRsg(const Tensor &spectrogram, const BandMap &map);

// Single-frame version operating on a flat [... x 33] buffer.
std::vector<double> AggregateRsgFrame(std::span<const double> frame, const BandMap &map);

}  // namespace emgtype

#endif  // EMGTYPE_FRONTEND_HPP_
