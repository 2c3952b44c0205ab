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

#ifndef EMGTYPE_AUGMENT_HPP_
#define EMGTYPE_AUGMENT_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "emgtype/frontend.hpp"
#include "emgtype/rng.hpp"
#include "emgtype/tensor.hpp"

namespace emgtype {

enum class MaskValue { kZero, kSampleMean };
enum class MaskStage { kPostRsg, kPreAggregation };

// Aggressive channel masking. The defaults are the harsh setting: masks
// up to 12 bands wide on a 6-band input, so a single mask erases the whole
// electrode half of the time.
struct AcmConfig {
  double apply_probability = 2.0 / 3.0;
  std::vector<int> n_masks_support = {0, 1, 2};
  int f_max = 12;
  int num_bands = static_cast<int>(kReducedBands);
  MaskValue mask_value = MaskValue::kZero;
  MaskStage stage = MaskStage::kPostRsg;

  // Frequency-mask part of the milder SpecAugment setting, for comparison.
  static AcmConfig SpecAugmentPreset();
  void Validate() const;
};

struct FrequencyMask {
  int start = 0;
  int width = 0;
  friend bool operator==(const FrequencyMask &, const FrequencyMask &) = default;
};

// Outcome of the mini-batch level draws.
struct AcmBatchDraw {
  bool applied = false;
  int num_masks = 0;
};

AcmBatchDraw SampleAcmBatch(const AcmConfig &config, std::uint64_t seed, std::uint64_t batch_index);

// Draws one mask: width uniform on {0..f_max-1} clamped to num_bands, then
// start uniform on {0..num_bands-width}.
FrequencyMask SampleMask(const AcmConfig &config, Rng &rng);

struct MaskRealization {
  AcmBatchDraw batch;
  std::size_t num_samples = 0;
  std::size_t num_electrodes = 0;
  // Indexed [sample * num_electrodes + electrode].
  std::vector<std::vector<FrequencyMask>> masks;

  std::span<const std::vector<FrequencyMask>> sample(std::size_t s) const {
    return std::span<const std::vector<FrequencyMask>>(masks).subspan(s * num_electrodes,
                                                                      num_electrodes);
  }
  friend bool operator==(const MaskRealization &a, const MaskRealization &b) {
    return a.batch.applied == b.batch.applied && a.batch.num_masks == b.batch.num_masks &&
           a.num_samples == b.num_samples && a.num_electrodes == b.num_electrodes &&
           a.masks == b.masks;
  }
};

// Full realization for one mini-batch. The apply gate and mask count are
// drawn once per batch (unless `forced_num_masks` pins the count and skips
// the gate); each (sample, electrode) then draws its masks from its own
// derived stream.
MaskRealization AcmSampleMasks(const AcmConfig &config, std::size_t num_samples,
                               std::size_t num_electrodes, std::uint64_t seed,
                               std::uint64_t batch_index = 0,
                               std::optional<int> forced_num_masks = std::nullopt);

// Applies one sample's masks to a [T x band x channel x F] tensor. F must be
// num_bands for post-RSG masking or 33 for pre-aggregation masking, where
// each masked band expands to its member FFT bins.
Tensor AcmApply(const Tensor &x, std::span<const std::vector<FrequencyMask>> electrode_masks,
                const AcmConfig &config);

struct AcmStatistics {
  std::size_t draws = 0;
  double erased_single_mask = 0.0;       // Pr[full erasure | n_f = 1]
  double full_width_two_masks = 0.0;     // Pr[some mask is full width | n_f = 2]
  double union_erased_two_masks = 0.0;   // Pr[union of both masks covers all bands | n_f = 2]
  double masked_fraction_all = 0.0;      // over all mini-batches
  double masked_fraction_gated = 0.0;    // over mini-batches that passed the gate
  double masked_fraction_nonzero = 0.0;  // over mini-batches with n_f >= 1
};

AcmStatistics AcmMonteCarlo(const AcmConfig &config, std::size_t draws, std::uint64_t seed);

// Cyclic roll of the channel axis (axis 2) of [T x band x channel (x F)]:
// channel c moves to c + offset (mod 16). Offsets are limited to -1, 0, 1.
Tensor RotateChannels(const Tensor &x, int offset);
int SampleRotationOffset(std::uint64_t seed, std::uint64_t sample_index);

struct JitterConfig {
  double max_offset_ms = 60.0;
  int max_offset_samples(int sample_rate_hz = kSampleRateHz) const;
};

// Per-band sample offsets, each uniform on [-max, +max].
std::array<int, kNumBands> SampleJitterOffsets(const JitterConfig &config, std::uint64_t seed,
                                               std::uint64_t sample_index);

// Delays band `b` by offsets[b] samples (negative advances); vacated samples
// are zero. Length is unchanged.
RawEmgWindow ShiftBands(const RawEmgWindow &window, const std::array<int, kNumBands> &offsets);

RawEmgWindow TemporalJitter(const RawEmgWindow &window, const JitterConfig &config,
                            std::uint64_t seed, std::uint64_t sample_index = 0);

}  // namespace emgtype

#endif  // EMGTYPE_AUGMENT_HPP_
