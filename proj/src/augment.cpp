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

#include "emgtype/augment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emgtype/error.hpp"

namespace emgtype {

namespace {

// Stream path tags so different draws never share a stream.
constexpr std::uint64_t kTagBatch = 1;
constexpr std::uint64_t kTagMask = 2;
constexpr std::uint64_t kTagRotation = 3;
constexpr std::uint64_t kTagJitter = 4;
constexpr std::uint64_t kTagMonteCarlo = 5;

int CoveredBands(const std::vector<FrequencyMask> &masks, int num_bands) {
  std::vector<bool> hit(num_bands, false);
  for (const FrequencyMask &m : masks)
    for (int b = m.start; b < m.start + m.width; ++b) hit[b] = true;
  return static_cast<int>(std::count(hit.begin(), hit.end(), true));
}

}  // namespace

AcmConfig AcmConfig::SpecAugmentPreset() {
  AcmConfig c;
  c.apply_probability = 1.0;
  c.f_max = 4;
  return c;
}

void AcmConfig::Validate() const {
  if (f_max < 1) ThrowUsage("ACM f_max must be >= 1");
  if (!(apply_probability >= 0.0 && apply_probability <= 1.0))
    ThrowUsage("ACM apply_probability must lie in [0, 1]");
  if (num_bands < 1) ThrowUsage("ACM num_bands must be >= 1");
  if (n_masks_support.empty()) ThrowUsage("ACM mask-count support is empty");
  for (int n : n_masks_support)
    if (n < 0) ThrowUsage("ACM mask counts must be non-negative");
}

AcmBatchDraw SampleAcmBatch(const AcmConfig &config, std::uint64_t seed,
                            std::uint64_t batch_index) {
  config.Validate();
  Rng rng = MakeRng(seed, {kTagBatch, batch_index});
  AcmBatchDraw draw;
  draw.applied = std::bernoulli_distribution(config.apply_probability)(rng);
  const std::size_t k = UniformInt<std::size_t>(rng, 0, config.n_masks_support.size() - 1);
  draw.num_masks = draw.applied ? config.n_masks_support[k] : 0;
  return draw;
}

FrequencyMask SampleMask(const AcmConfig &config, Rng &rng) {
  FrequencyMask m;
  m.width = std::min(UniformInt(rng, 0, config.f_max - 1), config.num_bands);
  m.start = UniformInt(rng, 0, config.num_bands - m.width);
  return m;
}

MaskRealization AcmSampleMasks(const AcmConfig &config, std::size_t num_samples,
                               std::size_t num_electrodes, std::uint64_t seed,
                               std::uint64_t batch_index, std::optional<int> forced_num_masks) {
  config.Validate();
  MaskRealization r;
  if (forced_num_masks) {
    if (*forced_num_masks < 0) ThrowUsage("mask count must be non-negative");
    r.batch = {*forced_num_masks > 0, *forced_num_masks};
  } else {
    r.batch = SampleAcmBatch(config, seed, batch_index);
  }
  r.num_samples = num_samples;
  r.num_electrodes = num_electrodes;
  r.masks.resize(num_samples * num_electrodes);
  if (r.batch.num_masks == 0) return r;
  for (std::size_t s = 0; s < num_samples; ++s) {
    for (std::size_t e = 0; e < num_electrodes; ++e) {
      Rng rng = MakeRng(seed, {kTagMask, batch_index, s, e});
      auto &list = r.masks[s * num_electrodes + e];
      for (int i = 0; i < r.batch.num_masks; ++i) list.push_back(SampleMask(config, rng));
    }
  }
  return r;
}

Tensor AcmApply(const Tensor &x, std::span<const std::vector<FrequencyMask>> electrode_masks,
                const AcmConfig &config) {
  config.Validate();
  const Shape &s = x.shape();
  if (s.size() != 4 || s[1] != kNumBands || s[2] != kNumChannels)
    ThrowUsage("ACM expects [T x 2 x 16 x F], got " + ShapeToString(s));
  if (electrode_masks.size() != kNumElectrodes)
    ThrowUsage("ACM needs masks for all 32 electrodes");
  const std::size_t bins = s[3];
  const bool pre = config.stage == MaskStage::kPreAggregation;
  if (!pre && bins != static_cast<std::size_t>(config.num_bands))
    ThrowUsage("post-RSG masking expects F = " + std::to_string(config.num_bands));
  if (pre && (bins != kFullBins || config.num_bands != static_cast<int>(kReducedBands)))
    ThrowUsage("pre-aggregation masking expects 33 bins and 6 dummy bands");

  const BandMap map = pre ? BuildBandMap() : BandMap{};
  const std::size_t T = s[0];
  Tensor out = x;
  for (std::size_t e = 0; e < kNumElectrodes; ++e) {
    std::vector<bool> masked(bins, false);
    for (const FrequencyMask &m : electrode_masks[e]) {
      if (m.width < 0 || m.start < 0 || m.start + m.width > config.num_bands)
        ThrowUsage("mask (start " + std::to_string(m.start) + ", width " +
                   std::to_string(m.width) + ") out of range");
      for (int b = m.start; b < m.start + m.width; ++b) {
        if (pre) {
          for (std::size_t f : map.Members(b)) masked[f] = true;
        } else {
          masked[b] = true;
        }
      }
    }
    for (std::size_t f = 0; f < bins; ++f) {
      if (!masked[f]) continue;
      double fill = 0.0;
      if (config.mask_value == MaskValue::kSampleMean) {
        for (std::size_t t = 0; t < T; ++t) fill += x[(t * kNumElectrodes + e) * bins + f];
        fill /= static_cast<double>(T);
      }
      for (std::size_t t = 0; t < T; ++t) out[(t * kNumElectrodes + e) * bins + f] = fill;
    }
  }
  return out;
}

AcmStatistics AcmMonteCarlo(const AcmConfig &config, std::size_t draws, std::uint64_t seed) {
  config.Validate();
  if (draws == 0) ThrowUsage("Monte-Carlo needs at least one draw");
  AcmStatistics st;
  st.draws = draws;
  const int B = config.num_bands;
  std::size_t erased1 = 0, full2 = 0, union2 = 0;
  double frac_all = 0.0, frac_gated = 0.0, frac_nonzero = 0.0;
  std::size_t n_gated = 0, n_nonzero = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng = MakeRng(seed, {kTagMonteCarlo, i});
    const FrequencyMask a = SampleMask(config, rng);
    if (a.width == B) ++erased1;

    const FrequencyMask b = SampleMask(config, rng);
    const FrequencyMask c = SampleMask(config, rng);
    if (b.width == B || c.width == B) ++full2;
    if (CoveredBands({b, c}, B) == B) ++union2;

    // One electrode of one mini-batch, with the batch-level draws.
    const AcmBatchDraw batch = SampleAcmBatch(config, seed, i);
    std::vector<FrequencyMask> masks;
    for (int k = 0; k < batch.num_masks; ++k) masks.push_back(SampleMask(config, rng));
    const double frac = static_cast<double>(CoveredBands(masks, B)) / B;
    frac_all += frac;
    if (batch.applied) {
      frac_gated += frac;
      ++n_gated;
    }
    if (batch.num_masks > 0) {
      frac_nonzero += frac;
      ++n_nonzero;
    }
  }
  const double n = static_cast<double>(draws);
  st.erased_single_mask = erased1 / n;
  st.full_width_two_masks = full2 / n;
  st.union_erased_two_masks = union2 / n;
  st.masked_fraction_all = frac_all / n;
  st.masked_fraction_gated = n_gated ? frac_gated / n_gated : 0.0;
  st.masked_fraction_nonzero = n_nonzero ? frac_nonzero / n_nonzero : 0.0;
  return st;
}

Tensor RotateChannels(const Tensor &x, int offset) {
  if (offset < -1 || offset > 1) ThrowUsage("rotation offset must be -1, 0 or +1");
  const Shape &s = x.shape();
  if (s.size() < 3 || s[1] != kNumBands || s[2] != kNumChannels)
    ThrowUsage("rotation expects [T x 2 x 16 ...], got " + ShapeToString(s));
  if (offset == 0) return x;
  std::size_t inner = 1;
  for (std::size_t i = 3; i < s.size(); ++i) inner *= s[i];
  const std::size_t C = kNumChannels;
  Tensor out(s);
  for (std::size_t tb = 0; tb < s[0] * s[1]; ++tb) {
    for (std::size_t c = 0; c < C; ++c) {
      const std::size_t dst = (c + C + offset) % C;
      std::copy_n(x.data() + (tb * C + c) * inner, inner, out.data() + (tb * C + dst) * inner);
    }
  }
  return out;
}

int SampleRotationOffset(std::uint64_t seed, std::uint64_t sample_index) {
  Rng rng = MakeRng(seed, {kTagRotation, sample_index});
  return UniformInt(rng, -1, 1);
}

int JitterConfig::max_offset_samples(int sample_rate_hz) const {
  if (max_offset_ms < 0.0) ThrowUsage("jitter max_offset_ms must be >= 0");
  return static_cast<int>(std::lround(max_offset_ms * sample_rate_hz / 1000.0));
}

std::array<int, kNumBands> SampleJitterOffsets(const JitterConfig &config, std::uint64_t seed,
                                               std::uint64_t sample_index) {
  const int m = config.max_offset_samples();
  std::array<int, kNumBands> offsets{};
  for (std::size_t b = 0; b < kNumBands; ++b) {
    Rng rng = MakeRng(seed, {kTagJitter, sample_index, b});
    offsets[b] = UniformInt(rng, -m, m);
  }
  return offsets;
}

RawEmgWindow ShiftBands(const RawEmgWindow &window, const std::array<int, kNumBands> &offsets) {
  CheckRawWindow(window);
  const long T = static_cast<long>(window.num_samples());
  RawEmgWindow out{Tensor(window.samples.shape()), window.sample_rate_hz};
  for (std::size_t b = 0; b < kNumBands; ++b) {
    for (long t = 0; t < T; ++t) {
      const long src = t - offsets[b];
      if (src < 0 || src >= T) continue;
      for (std::size_t c = 0; c < kNumChannels; ++c)
        out.samples.at({static_cast<std::size_t>(t), b, c}) =
            window.samples.at({static_cast<std::size_t>(src), b, c});
    }
  }
  return out;
}

RawEmgWindow TemporalJitter(const RawEmgWindow &window, const JitterConfig &config,
                            std::uint64_t seed, std::uint64_t sample_index) {
  CheckRawWindow(window);
  const int m = config.max_offset_samples(window.sample_rate_hz);
  if (static_cast<std::size_t>(m) > window.num_samples())
    ThrowUsage("jitter offset of " + std::to_string(m) + " samples exceeds the window length");
  return ShiftBands(window, SampleJitterOffsets(config, seed, sample_index));
}

}  // namespace emgtype
