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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emgtype/error.hpp"
#include "emgtype/frontend.hpp"
#include "oracles.hpp"

using namespace emgtype;

namespace {

RawEmgWindow Window(std::size_t n, std::mt19937_64 &rng) {
  RawEmgWindow w;
  w.samples = oracle::RandomTensor({n, kNumBands, kNumChannels}, rng);
  return w;
}

std::vector<double> Electrode(const RawEmgWindow &w, std::size_t e) {
  std::vector<double> x(w.num_samples());
  for (std::size_t t = 0; t < x.size(); ++t) x[t] = w.samples[t * kNumElectrodes + e];
  return x;
}

}  // namespace

TEST_SUITE("frontend") {

TEST_CASE("zero input gives the log floor at 125 frames per second") {
  RawEmgWindow w;
  w.samples = Tensor({2000, 2, 16});
  const Tensor s = StftLogPower(w);
  CHECK(s.shape() == Shape{125, 2, 16, 33});
  for (double v : s.values()) CHECK(v == doctest::Approx(-6.0).epsilon(1e-12));
}

TEST_CASE("frame count is ceil(T / 16)") {
  std::mt19937_64 rng(1);
  for (std::size_t n : {1u, 15u, 16u, 17u, 63u, 64u, 65u, 999u}) {
    CHECK(StftLogPower(Window(n, rng)).dim(0) == (n + 15) / 16);
  }
}

TEST_CASE("matches a direct DFT on every electrode") {
  std::mt19937_64 rng(2);
  for (bool hann : {false, true}) {
    const RawEmgWindow w = Window(333, rng);
    StftOptions opts;
    opts.window = hann ? WindowFunction::kHann : WindowFunction::kRectangular;
    const Tensor s = StftLogPower(w, opts);
    for (std::size_t e = 0; e < kNumElectrodes; e += 5) {
      const auto ref = oracle::DftLogPower(Electrode(w, e), 64, 16, hann);
      REQUIRE(ref.size() == s.dim(0));
      for (std::size_t t = 0; t < ref.size(); ++t)
        for (std::size_t f = 0; f < 33; ++f)
          CHECK(s.at({t, e / 16, e % 16, f}) == doctest::Approx(ref[t][f]).epsilon(1e-9));
    }
  }
}

TEST_CASE("250 Hz sine peaks in bin 8 once the window is full") {
  RawEmgWindow w;
  w.samples = Tensor({2000, 2, 16});
  for (std::size_t t = 0; t < 2000; ++t)
    for (std::size_t e = 0; e < kNumElectrodes; ++e)
      w.samples[t * kNumElectrodes + e] = std::sin(2 * std::numbers::pi * 250.0 * t / 2000.0);
  const Tensor s = StftLogPower(w);
  for (std::size_t t = 3; t < s.dim(0); ++t)
    for (std::size_t f = 0; f < 33; ++f)
      if (f != 8) CHECK(s.at({t, 0, 3, f}) < s.at({t, 0, 3, 8}));
}

TEST_CASE("causality: frames up to t ignore samples after 16t+15") {
  std::mt19937_64 rng(3);
  RawEmgWindow a = Window(400, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, 23)(rng);
    RawEmgWindow b = a;
    for (std::size_t s = 16 * t + 16; s < 400; ++s)
      for (std::size_t e = 0; e < kNumElectrodes; ++e) b.samples[s * kNumElectrodes + e] += 1.0;
    const Tensor sa = StftLogPower(a), sb = StftLogPower(b);
    for (std::size_t u = 0; u <= t; ++u)
      for (std::size_t i = 0; i < sa.row_size(); ++i) CHECK(sa.row(u)[i] == sb.row(u)[i]);
  }
}

TEST_CASE("streaming STFT matches batch for any chunking") {
  std::mt19937_64 rng(4);
  const RawEmgWindow w = Window(517, rng);
  const Tensor batch = StftLogPower(w);
  for (std::size_t chunk : {1u, 7u, 16u, 100u, 517u}) {
    StreamingStft st;
    std::vector<std::vector<double>> frames;
    const auto all = w.samples.values();
    for (std::size_t s = 0; s < 517; s += chunk) {
      const std::size_t len = std::min(chunk, 517 - s);
      for (auto &f : st.Push(all.subspan(s * 32, len * 32))) frames.push_back(f);
    }
    for (auto &f : st.Flush()) frames.push_back(f);
    REQUIRE(frames.size() == batch.dim(0));
    for (std::size_t t = 0; t < frames.size(); ++t)
      for (std::size_t i = 0; i < frames[t].size(); ++i) CHECK(frames[t][i] == batch.row(t)[i]);
  }
}

TEST_CASE("input validation") {
  RawEmgWindow w;
  w.samples = Tensor({0, 2, 16});
  CHECK_THROWS_WITH(StftLogPower(w), "empty signal");
  w.samples = Tensor({10, 2, 16});
  StftOptions bad;
  bad.hop = 0;
  CHECK_THROWS_WITH(StftLogPower(w, bad), "invalid hop");
  w.sample_rate_hz = 1000;
  CHECK_THROWS_WITH(StftLogPower(w), "unsupported sample rate");
  w.sample_rate_hz = 2000;
  w.samples = Tensor({10, 2, 8});
  CHECK_THROWS_AS(StftLogPower(w), Error);
}

TEST_CASE("band map") {
  const BandMap m = BuildBandMap();
  CHECK(m.Populations() == std::array<int, 6>{2, 2, 4, 4, 10, 10});
  CHECK(m.bin_to_band[0] == -1);
  CHECK(m.bin_to_band[1] == 0);
  CHECK(m.bin_to_band[8] == 2);  // 250 Hz, inclusive upper edge of the third band
  CHECK(m.bin_to_band[2] == 0);
  CHECK(m.bin_to_band[4] == 1);
  CHECK(m.bin_to_band[12] == 3);
  for (std::size_t f = 1; f < 33; ++f) CHECK(m.bin_to_band[f] >= 0);
}

TEST_CASE("RSG examples") {
  const BandMap m = BuildBandMap();
  Tensor s({1, 33}, -6.0);
  Tensor r = AggregateRsg(s, m);
  const std::vector<double> expect = {-12, -12, -24, -24, -60, -60};
  for (std::size_t b = 0; b < 6; ++b) CHECK(r[b] == expect[b]);
  s[23] = 1.0;
  r = AggregateRsg(s, m);
  CHECK(r[5] == -53.0);
  for (std::size_t b = 0; b < 5; ++b) CHECK(r[b] == expect[b]);
  CHECK_THROWS_WITH(AggregateRsg(Tensor({3, 6}), m), "expected full-resolution spectrogram");
}

TEST_CASE("RSG equals the summation oracle exactly on random tensors") {
  std::mt19937_64 rng(5);
  const BandMap m = BuildBandMap();
  for (int i = 0; i < 100; ++i) {
    const Tensor s = oracle::RandomTensor({7, 2, 16, 33}, rng, -6, 4);
    CHECK(AggregateRsg(s, m) == oracle::RsgSum(s));
  }
}

TEST_CASE("RSG is linear") {
  std::mt19937_64 rng(6);
  const BandMap m = BuildBandMap();
  const Tensor a = oracle::RandomTensor({5, 33}, rng), b = oracle::RandomTensor({5, 33}, rng);
  Tensor mix(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) mix[i] = 2.5 * a[i] - 0.75 * b[i];
  const Tensor ra = AggregateRsg(a, m), rb = AggregateRsg(b, m), rm = AggregateRsg(mix, m);
  for (std::size_t i = 0; i < rm.size(); ++i)
    CHECK(rm[i] == doctest::Approx(2.5 * ra[i] - 0.75 * rb[i]).epsilon(1e-12));
}

}  // TEST_SUITE
