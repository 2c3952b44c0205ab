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

#ifndef EMGTYPE_SESSION_HPP_
#define EMGTYPE_SESSION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "emgtype/charset.hpp"
#include "emgtype/frontend.hpp"

namespace emgtype {

enum class Split {
  kTrain,
  kTrainDomainVal,
  kOtherDomainVal,
  kTestDomainVal,
  kTestDomainTest,
};

const char *SplitName(Split s);
Split ParseSplit(const std::string &name);

struct KeyLabel {
  std::uint64_t timestamp_samples = 0;
  char32_t key = 0;
  friend bool operator==(const KeyLabel &, const KeyLabel &) = default;
};

// One recording: raw 2 kHz EMG for both bands plus timestamped keystrokes.
struct SessionRecord {
  std::string participant_id;
  std::string session_id;
  Split split = Split::kTrain;
  int sample_rate_hz = kSampleRateHz;
  std::vector<float> emg;  // [T x band x channel]
  std::vector<KeyLabel> labels;

  std::size_t num_samples() const { return emg.size() / kNumElectrodes; }
  RawEmgWindow ToWindow() const;
  Keystrokes LabelKeys() const;
  void Validate() const;  // throws kData

  friend bool operator==(const SessionRecord &, const SessionRecord &) = default;
};

// On disk: a versioned text header ("EMGSESSION 1" ... "end_header")
// followed by little-endian float32 samples.
std::string SerializeSession(const SessionRecord &record);
SessionRecord ParseSession(const std::string &bytes);

void WriteSession(const SessionRecord &record, const std::string &path);
SessionRecord ReadSession(const std::string &path);

// Whole-file helpers shared by the on-disk formats.
std::string ReadFileBytes(const std::string &path);
void WriteFileBytes(const std::string &path, const std::string &bytes);

void AppendFloat32LE(std::string &out, float v);
float ReadFloat32LE(const char *p);

}  // namespace emgtype

#endif  // EMGTYPE_SESSION_HPP_
