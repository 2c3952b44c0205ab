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

#include "emgtype/session.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "emgtype/error.hpp"

namespace emgtype {

namespace {

constexpr const char *kMagic = "EMGSESSION";
constexpr int kVersion = 1;

bool ValidId(const std::string &id) {
  if (id.empty()) return false;
  for (char c : id)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

const char *SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kTrainDomainVal: return "train_domain_val";
    case Split::kOtherDomainVal: return "other_domain_val";
    case Split::kTestDomainVal: return "test_domain_val";
    case Split::kTestDomainTest: return "test_domain_test";
  }
  return "unknown";
}

Split ParseSplit(const std::string &name) {
  for (Split s : {Split::kTrain, Split::kTrainDomainVal, Split::kOtherDomainVal,
                  Split::kTestDomainVal, Split::kTestDomainTest})
    if (name == SplitName(s)) return s;
  ThrowData("unknown split tag '" + name + "'");
}

void AppendFloat32LE(std::string &out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 4; ++i) out += static_cast<char>((bits >> (8 * i)) & 0xFF);
}

float ReadFloat32LE(const char *p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  float v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

RawEmgWindow SessionRecord::ToWindow() const {
  RawEmgWindow w;
  w.sample_rate_hz = sample_rate_hz;
  w.samples = Tensor({num_samples(), kNumBands, kNumChannels},
                     std::vector<double>(emg.begin(), emg.end()));
  return w;
}

Keystrokes SessionRecord::LabelKeys() const {
  Keystrokes k;
  for (const KeyLabel &l : labels) k += l.key;
  return k;
}

void SessionRecord::Validate() const {
  if (sample_rate_hz != kSampleRateHz) ThrowData("unsupported sample rate");
  if (!ValidId(participant_id) || !ValidId(session_id))
    ThrowData("participant and session ids must be non-empty and free of whitespace");
  if (emg.size() % kNumElectrodes != 0) ThrowData("EMG is not a whole number of 32-electrode rows");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0 && labels[i].timestamp_samples <= labels[i - 1].timestamp_samples)
      ThrowData("label timestamps are not strictly increasing");
    if (labels[i].timestamp_samples >= num_samples())
      ThrowData("label timestamp beyond the end of the recording");
  }
}

std::string SerializeSession(const SessionRecord &r) {
  r.Validate();
  std::ostringstream h;
  h << kMagic << ' ' << kVersion << '\n'
    << "participant_id " << r.participant_id << '\n'
    << "session_id " << r.session_id << '\n'
    << "split " << SplitName(r.split) << '\n'
    << "sample_rate_hz " << r.sample_rate_hz << '\n'
    << "num_samples " << r.num_samples() << '\n'
    << "num_bands " << kNumBands << '\n'
    << "num_channels " << kNumChannels << '\n'
    << "num_labels " << r.labels.size() << '\n';
  for (const KeyLabel &l : r.labels)
    h << "label " << l.timestamp_samples << " U+" << std::uppercase << std::hex << std::setw(4)
      << std::setfill('0') << static_cast<std::uint32_t>(l.key) << std::dec << '\n';
  h << "payload_bytes " << r.emg.size() * 4 << '\n' << "end_header\n";
  std::string out = h.str();
  out.reserve(out.size() + r.emg.size() * 4);
  for (float v : r.emg) AppendFloat32LE(out, v);
  return out;
}

SessionRecord ParseSession(const std::string &bytes) {
  const std::string end_marker = "end_header\n";
  const auto end = bytes.find(end_marker);
  if (bytes.rfind(kMagic, 0) != 0 || end == std::string::npos) ThrowData("not a session file");
  std::istringstream h(bytes.substr(0, end));
  std::string magic;
  int version = 0;
  h >> magic >> version;
  if (magic != kMagic) ThrowData("not a session file");
  if (version != kVersion) ThrowData("unsupported session version " + std::to_string(version));

  SessionRecord r;
  std::size_t num_samples = 0, num_labels = 0, bands = 0, channels = 0, payload = 0;
  std::string key;
  auto expect = [&](const char *name) {
    if (!(h >> key) || key != name) ThrowData(std::string("session header: expected '") + name + "'");
  };
  std::string split;
  expect("participant_id");
  h >> r.participant_id;
  expect("session_id");
  h >> r.session_id;
  expect("split");
  h >> split;
  r.split = ParseSplit(split);
  expect("sample_rate_hz");
  h >> r.sample_rate_hz;
  expect("num_samples");
  h >> num_samples;
  expect("num_bands");
  h >> bands;
  expect("num_channels");
  h >> channels;
  expect("num_labels");
  h >> num_labels;
  if (!h) ThrowData("session header: malformed field");
  if (r.sample_rate_hz != kSampleRateHz) ThrowData("unsupported sample rate");
  if (bands != kNumBands || channels != kNumChannels)
    ThrowData("session must have 2 bands of 16 channels");
  for (std::size_t i = 0; i < num_labels; ++i) {
    expect("label");
    KeyLabel l;
    std::string cp;
    h >> l.timestamp_samples >> cp;
    if (!h || cp.size() < 3 || cp.rfind("U+", 0) != 0) ThrowData("session header: malformed label");
    l.key = static_cast<char32_t>(std::stoul(cp.substr(2), nullptr, 16));
    r.labels.push_back(l);
  }
  expect("payload_bytes");
  h >> payload;
  if (!h || payload != num_samples * kNumElectrodes * 4)
    ThrowData("session header: payload_bytes disagrees with num_samples");

  const std::size_t start = end + end_marker.size();
  const std::size_t actual = bytes.size() - start;
  if (actual != payload) {
    ThrowData("truncated payload: expected " + std::to_string(payload) + " bytes, got " +
              std::to_string(actual));
  }
  r.emg.resize(num_samples * kNumElectrodes);
  for (std::size_t i = 0; i < r.emg.size(); ++i) r.emg[i] = ReadFloat32LE(&bytes[start + 4 * i]);
  r.Validate();
  return r;
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFileBytes(const std::string &path, const std::string &bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowData("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) ThrowData("failed writing '" + path + "'");
}

void WriteSession(const SessionRecord &record, const std::string &path) {
  WriteFileBytes(path, SerializeSession(record));
}

SessionRecord ReadSession(const std::string &path) { return ParseSession(ReadFileBytes(path)); }

}  // namespace emgtype
