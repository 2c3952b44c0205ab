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

#include "emgtype/simulate.hpp"

#include <cmath>
#include <numbers>

#include "emgtype/error.hpp"
#include "emgtype/frontend.hpp"
#include "emgtype/rng.hpp"

namespace emgtype {

namespace {

constexpr std::size_t kOracleUnits = (kNumChannels / 2) * kReducedBands;
constexpr std::size_t kOracleWidth = 64;  // key units, one constant unit, padding
constexpr double kOracleConstant = 100.0;
constexpr double kOracleBlankLogit = 5.0;
// Rotation-averaged activation at which a key overtakes the blank.
constexpr double kOracleMinActivation = 0.25;
// The first conv block adds a causal moving average of this many frames,
// scaled by kOracleSmoothGain, to its input.
constexpr std::size_t kOracleSmoothFrames = 4;
constexpr double kOracleSmoothGain = 10.0;
// Keys occupy every other band.
constexpr std::size_t kBandStride = 2;
constexpr std::size_t kMaxKeys = kNumBands * (kNumChannels / 2) * (kReducedBands / kBandStride);
static_assert(kOracleUnits < kOracleWidth);

}  // namespace

void SimulationSpec::Validate() const {
  if (!(duration_s > 0)) ThrowUsage("simulation duration must be positive");
  if (lead_in_s < 0 || min_gap_ms <= 0 || max_gap_ms < min_gap_ms)
    ThrowUsage("simulation gaps must satisfy 0 < min_gap <= max_gap");
  if (!(burst_sigma_ms > 0) || amplitude < 0 || noise_std < 0)
    ThrowUsage("simulation burst width must be positive, amplitude and noise non-negative");
  if (alphabet.empty() || alphabet.size() > kMaxKeys)
    ThrowUsage("simulation alphabet must hold 1 to 48 keys");
  for (std::size_t i = 0; i < alphabet.size(); ++i)
    if (alphabet.find(alphabet[i], i + 1) != Keystrokes::npos)
      ThrowUsage("simulation alphabet has repeated keys");
}

KeyPlacement PlaceKey(const Keystrokes &alphabet, char32_t key) {
  const auto i = alphabet.find(key);
  if (i == Keystrokes::npos) ThrowUsage("key not in the simulation alphabet");
  return {i % 2, 2 * ((i / 2) % (kNumChannels / 2)), kBandStride * (i / kNumChannels)};
}

SessionRecord SimulateSession(const SimulationSpec &spec, std::uint64_t seed) {
  spec.Validate();
  SessionRecord r;
  r.participant_id = spec.participant_id;
  r.session_id = spec.session_id;
  r.split = spec.split;
  r.sample_rate_hz = kSampleRateHz;

  const double fs = kSampleRateHz;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * fs));
  const double sigma = spec.burst_sigma_ms * 1e-3 * fs;
  const auto half = static_cast<std::size_t>(std::ceil(4 * sigma));
  std::vector<double> emg(n * kNumElectrodes, 0.0);

  Rng timing = MakeRng(seed, {0});
  const BandMap bands = BuildBandMap();
  const double bin_hz = fs / StftOptions{}.n_fft;
  double t = spec.lead_in_s * fs;
  std::uint64_t press = 0;
  while (true) {
    t += std::uniform_real_distribution<double>(spec.min_gap_ms, spec.max_gap_ms)(timing) * 1e-3 * fs;
    const auto centre = static_cast<std::size_t>(std::llround(t));
    if (centre + half >= n) break;
    const char32_t key = spec.alphabet[UniformInt<std::size_t>(timing, 0, spec.alphabet.size() - 1)];
    r.labels.push_back({centre, key});

    const KeyPlacement where = PlaceKey(spec.alphabet, key);
    const std::size_t electrode = where.hand * kNumChannels + where.channel;
    Rng phases = MakeRng(seed, {1, press++});
    for (std::size_t bin : bands.Members(where.band)) {
      const double phase = std::uniform_real_distribution<double>(0, 2 * std::numbers::pi)(phases);
      const double w = 2 * std::numbers::pi * static_cast<double>(bin) * bin_hz / fs;
      for (std::size_t s = centre - half; s <= centre + half; ++s) {
        const double d = (static_cast<double>(s) - static_cast<double>(centre)) / sigma;
        emg[s * kNumElectrodes + electrode] +=
            spec.amplitude * std::exp(-0.5 * d * d) * std::sin(w * static_cast<double>(s) + phase);
      }
    }
  }

  if (spec.noise_std > 0) {
    Rng noise = MakeRng(seed, {2});
    std::normal_distribution<double> gauss(0.0, spec.noise_std);
    for (double &v : emg) v += gauss(noise);
  }
  r.emg.assign(emg.begin(), emg.end());
  r.Validate();
  return r;
}

Checkpoint OracleCheckpoint(const Keystrokes &alphabet, const Charset &charset, double threshold) {
  ModelConfig c;
  c.variant = Variant::kSplitAndShare;
  c.embed_dim = kOracleWidth;
  c.mlp_layer_sizes = {kOracleWidth};
  c.block_channels = {16, 16, 16, 16};
  c.vocab_size = charset.size();
  c.input_bins = kReducedBands;

  // The constant unit dominates every LayerNorm, which then acts as the
  // fixed affine map a -> (a - mean) / sigma on the key units.
  const double D = static_cast<double>(kOracleWidth);
  const double ln_gain = D / (kOracleConstant * std::sqrt(D - 1));
  const double key_gain = kOracleBlankLogit / (kOracleMinActivation * ln_gain);

  WeightStore w;
  for (const TensorSpec &spec : ExpectedTensors(c)) {
    if (spec.alias_of) {
      w.Alias(spec.name, *spec.alias_of);
      continue;
    }
    Tensor t(spec.shape);
    if (spec.name.find("norm.weight") != std::string::npos) {
      std::fill(t.values().begin(), t.values().end(), 1.0);
    } else if (spec.name == "left.block0.conv.weight") {
      const std::size_t K = spec.shape[0], width = spec.shape[3];
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t lag = 0; lag < kOracleSmoothFrames; ++lag)
          t.at({k, k, 0, width - 1 - lag}) = kOracleSmoothGain / kOracleSmoothFrames;
    } else if (spec.name == "left.mlp.0.weight") {
      for (std::size_t ch = 0; ch < kNumChannels; ch += 2)
        for (std::size_t b = 0; b < kReducedBands; ++b)
          t.at({(ch / 2) * kReducedBands + b, ch * kReducedBands + b}) = 1.0;
    } else if (spec.name == "left.mlp.0.bias") {
      std::fill(t.values().begin(), t.values().begin() + kOracleUnits, -threshold);
      t[kOracleUnits] = kOracleConstant;
    } else if (spec.name == "head.weight") {
      for (char32_t key : alphabet) {
        const auto cls = charset.index_of(key);
        if (!cls) ThrowUsage("simulation key outside the charset");
        const KeyPlacement p = PlaceKey(alphabet, key);
        t.at({*cls, p.hand * kOracleWidth + (p.channel / 2) * kReducedBands + p.band}) = key_gain;
      }
    } else if (spec.name == "head.bias") {
      // A silent key unit normalizes to -1 / sqrt(D - 1).
      for (char32_t key : alphabet) t[*charset.index_of(key)] = key_gain / std::sqrt(D - 1);
      t[charset.blank_index()] = kOracleBlankLogit;
    }
    w.Set(spec.name, std::move(t));
  }
  return {c, std::move(w)};
}

}  // namespace emgtype
