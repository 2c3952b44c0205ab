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

#ifndef EMGTYPE_SIMULATE_HPP_
#define EMGTYPE_SIMULATE_HPP_

#include <cstdint>
#include <string>

#include "emgtype/charset.hpp"
#include "emgtype/checkpoint.hpp"
#include "emgtype/session.hpp"

namespace emgtype {

struct SimulationSpec {
  std::string participant_id = "synthetic";
  std::string session_id = "synthetic-0";
  Split split = Split::kTestDomainTest;
  double duration_s = 10.0;
  double lead_in_s = 1.5;       // silence before the first key
  double min_gap_ms = 250.0;    // between consecutive key presses
  double max_gap_ms = 600.0;
  double burst_sigma_ms = 12.0; // Gaussian envelope width
  double amplitude = 1.0;
  double noise_std = 0.1;
  Keystrokes alphabet = U"abcdefghijklmnopqrstuvwxyz ⌫";

  void Validate() const;
};

// Where a key's template lives: one wristband, one even-numbered channel
// and one of the six RSG bands. Key i of the alphabet goes to hand i % 2,
// channel 2 * ((i / 2) % 8) and band 2 * (i / 16), so at most 48 keys.
struct KeyPlacement {
  std::size_t hand = 0;
  std::size_t channel = 0;
  std::size_t band = 0;
};

KeyPlacement PlaceKey(const Keystrokes &alphabet, char32_t key);

// Keys drawn uniformly from the alphabet at random gaps; each press adds a
// Gaussian-windowed sum of sinusoids at the FFT bin centres of its band on
// its channel. White noise covers every channel.
SessionRecord SimulateSession(const SimulationSpec &spec, std::uint64_t seed);

// Hand-set split_and_share weights that read simulated sessions. MLP unit
// (channel / 2) * 6 + band fires when that cell exceeds `threshold` after
// RTN; one more unit is a large constant that pins every LayerNorm's
// statistics. The TDS blocks pass features through and the head maps each
// unit to its key, with the blank held at a constant logit.
Checkpoint OracleCheckpoint(const Keystrokes &alphabet, const Charset &charset = Charset::Default(),
                            double threshold = 3.0);

}  // namespace emgtype

#endif  // EMGTYPE_SIMULATE_HPP_
