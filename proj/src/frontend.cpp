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

#include "emgtype/frontend.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "emgtype/error.hpp"

namespace emgtype {

namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
fftw_plan R2cPlan(int n_fft) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n_fft);
  if (it != plans.end()) return it->second;
  double *in = fftw_alloc_real(n_fft);
  fftw_complex *out = fftw_alloc_complex(n_fft / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(n_fft, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (plan == nullptr) ThrowUsage("could not plan FFT of size " + std::to_string(n_fft));
  plans.emplace(n_fft, plan);
  return plan;
}

void CheckOptions(const StftOptions &opts) {
  if (opts.hop <= 0) ThrowUsage("invalid hop");
  if (opts.n_fft < 2 || opts.n_fft % 2 != 0) ThrowUsage("n_fft must be even and >= 2");
  if (opts.n_fft < opts.hop) ThrowUsage("n_fft must be at least the hop");
}

}  // namespace

void CheckRawWindow(const RawEmgWindow &window) {
  if (window.sample_rate_hz != kSampleRateHz) ThrowData("unsupported sample rate");
  const Shape &s = window.samples.shape();
  if (s.size() != 3 || s[1] != kNumBands || s[2] != kNumChannels) {
    ThrowData("raw EMG must be [T x 2 x 16], got " + ShapeToString(s));
  }
}

struct StreamingStft::Impl {
  StftOptions opts;
  fftw_plan plan;
  std::vector<double> taper;
  // Per-electrode circular history of the last n_fft samples.
  std::vector<double> history;
  std::size_t head = 0;  // index of the oldest sample
  int pending = 0;       // samples since the last emitted frame
  std::size_t emitted = 0;
  std::vector<double> in;
  std::vector<fftw_complex> out;

  explicit Impl(const StftOptions &o)
      : opts(o),
        plan(R2cPlan(o.n_fft)),
        taper(o.n_fft, 1.0),
        history(static_cast<std::size_t>(o.n_fft) * kNumElectrodes, 0.0),
        in(o.n_fft),
        out(o.num_bins()) {
    if (o.window == WindowFunction::kHann) {
      for (int n = 0; n < o.n_fft; ++n)
        taper[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / o.n_fft);
    }
  }

  void PushSample(const double *electrodes) {
    const std::size_t n = opts.n_fft;
    for (std::size_t e = 0; e < kNumElectrodes; ++e) history[e * n + head] = electrodes[e];
    head = (head + 1) % n;
    ++pending;
  }

  std::vector<double> Emit() {
    const std::size_t n = opts.n_fft;
    const std::size_t bins = opts.num_bins();
    std::vector<double> frame(kNumElectrodes * bins);
    for (std::size_t e = 0; e < kNumElectrodes; ++e) {
      const double *h = &history[e * n];
      for (std::size_t i = 0; i < n; ++i) in[i] = h[(head + i) % n] * taper[i];
      fftw_execute_dft_r2c(plan, in.data(), out.data());
      for (std::size_t f = 0; f < bins; ++f) {
        const double power = out[f][0] * out[f][0] + out[f][1] * out[f][1];
        frame[e * bins + f] = std::log10(power + kLogPowerFloor);
      }
    }
    pending = 0;
    ++emitted;
    return frame;
  }
};

StreamingStft::StreamingStft(const StftOptions &opts) {
  CheckOptions(opts);
  impl_ = std::make_unique<Impl>(opts);
}
StreamingStft::~StreamingStft() = default;
StreamingStft::StreamingStft(StreamingStft &&) noexcept = default;
StreamingStft &StreamingStft::operator=(StreamingStft &&) noexcept = default;

std::vector<std::vector<double>> StreamingStft::Push(std::span<const double> samples) {
  if (samples.size() % kNumElectrodes != 0)
    ThrowUsage("sample chunk is not a whole number of 32-electrode rows");
  std::vector<std::vector<double>> frames;
  for (std::size_t i = 0; i < samples.size(); i += kNumElectrodes) {
    impl_->PushSample(&samples[i]);
    if (impl_->pending == impl_->opts.hop) frames.push_back(impl_->Emit());
  }
  return frames;
}

std::vector<std::vector<double>> StreamingStft::Flush() {
  std::vector<std::vector<double>> frames;
  if (impl_->pending == 0) return frames;
  const double zeros[kNumElectrodes] = {};
  while (impl_->pending < impl_->opts.hop) impl_->PushSample(zeros);
  frames.push_back(impl_->Emit());
  return frames;
}

std::size_t StreamingStft::frames_emitted() const { return impl_->emitted; }

Tensor StftLogPower(const RawEmgWindow &window, const StftOptions &opts) {
  CheckOptions(opts);
  CheckRawWindow(window);
  if (window.num_samples() == 0) ThrowData("empty signal");
  StreamingStft stft(opts);
  auto frames = stft.Push(window.samples.values());
  for (auto &f : stft.Flush()) frames.push_back(std::move(f));

  const std::size_t bins = opts.num_bins();
  Tensor out({frames.size(), kNumBands, kNumChannels, bins});
  for (std::size_t t = 0; t < frames.size(); ++t)
    std::copy(frames[t].begin(), frames[t].end(), out.row(t).begin());
  return out;
}

std::array<int, kReducedBands> BandMap::Populations() const {
  std::array<int, kReducedBands> pop{};
  for (int b : bin_to_band)
    if (b >= 0) ++pop[b];
  return pop;
}

std::vector<std::size_t> BandMap::Members(std::size_t band) const {
  std::vector<std::size_t> bins;
  for (std::size_t f = 0; f < bin_to_band.size(); ++f)
    if (bin_to_band[f] == static_cast<int>(band)) bins.push_back(f);
  return bins;
}

BandMap BuildBandMap(const StftOptions &opts, int sample_rate_hz) {
  CheckOptions(opts);
  BandMap map;
  map.edges_hz = {{{31.25, 62.5}, {62.5, 125.0}, {125.0, 250.0},
                   {250.0, 375.0}, {375.0, 687.5}, {687.5, 1000.0}}};
  const std::size_t bins = opts.num_bins();
  const double spacing = static_cast<double>(sample_rate_hz) / opts.n_fft;
  map.bin_to_band.assign(bins, -1);
  for (std::size_t f = 1; f < bins; ++f) {
    const double center = f * spacing;
    for (std::size_t b = 0; b < kReducedBands; ++b) {
      const auto [lo, hi] = map.edges_hz[b];
      const bool above = b == 0 ? center >= lo : center > lo;
      if (above && center <= hi) {
        map.bin_to_band[f] = static_cast<int>(b);
        break;
      }
    }
  }
  return map;
}

std::vector<double> AggregateRsgFrame(std::span<const double> frame, const BandMap &map) {
  const std::size_t bins = map.bin_to_band.size();
  if (bins != kFullBins || frame.size() % bins != 0)
    ThrowUsage("expected full-resolution spectrogram");
  const std::size_t groups = frame.size() / bins;
  std::vector<double> out(groups * kReducedBands, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    const double *src = &frame[g * bins];
    double *dst = &out[g * kReducedBands];
    for (std::size_t f = 0; f < bins; ++f) {
      const int b = map.bin_to_band[f];
      if (b >= 0) dst[b] += src[f];
    }
  }
  return out;
}

Tensor AggregateRsg(const Tensor &spectrogram, const BandMap &map) {
  if (spectrogram.rank() == 0 || spectrogram.shape().back() != kFullBins)
    ThrowUsage("expected full-resolution spectrogram");
  Shape shape = spectrogram.shape();
  shape.back() = kReducedBands;
  return Tensor(shape, AggregateRsgFrame(spectrogram.values(), map));
}

}  // namespace emgtype
