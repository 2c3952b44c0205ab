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
#include <random>

#include "doctest.h"
#include "emgtype/error.hpp"
#include "emgtype/normalize.hpp"
#include "oracles.hpp"

using namespace emgtype;

namespace {

double MaxRelError(const Tensor &a, const Tensor &b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return worst;
}

}  // namespace

TEST_SUITE("normalize") {

TEST_CASE("hand example [1, 2, 3] with a two-frame warm-up") {
  RtnConfig c;
  c.warmup_frames = 2;
  c.epsilon = 1e-15;
  const Tensor out = RtnBatch(Tensor({3, 1}, std::vector<double>{1, 2, 3}), c);
  CHECK(out[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out[2] == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("warm-up frames are released together") {
  RtnConfig c;
  c.warmup_frames = 4;
  RollingNormalizer rtn(c, 3);
  const std::vector<double> f = {1, 2, 3};
  for (int i = 0; i < 3; ++i) CHECK(rtn.Push(f).empty());
  CHECK(rtn.Push(f).size() == 4);
  CHECK(rtn.Push(f).size() == 1);
  CHECK(rtn.num_features() == 3);
  CHECK(rtn.frozen_mean() == std::vector<double>{1, 2, 3});
}

TEST_CASE("constant input normalizes to exactly zero") {
  const Tensor out = RtnBatch(Tensor({300, 2, 16, 6}, 3.25));
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("single frame gives zeros") {
  std::mt19937_64 rng(1);
  const Tensor out = RtnBatch(oracle::RandomTensor({1, 192}, rng));
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("default state covers 2 x 16 x 6 features") {
  RollingNormalizer rtn(RtnConfig{}, 2 * 16 * 6);
  CHECK(rtn.num_features() == 192);
  CHECK_THROWS_AS(rtn.Push(std::vector<double>(10)), Error);
}

TEST_CASE("config validation") {
  RtnConfig c;
  c.warmup_frames = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  CHECK_NOTHROW(RtnConfig::Sliding(500).Validate());
  CHECK_THROWS_AS(RtnConfig::Sliding(100).Validate(), Error);
  RtnConfig e;
  e.epsilon = 0;
  CHECK_THROWS_AS(e.Validate(), Error);
}

TEST_CASE("streaming equals recomputation from scratch") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5; ++i) {
    const Tensor x = oracle::RandomTensor({400, 12}, rng, -3, 5);
    CHECK(MaxRelError(RtnBatch(x), oracle::RtnRecompute(x, 125, 1e-6)) <= 1e-9);
  }
}

TEST_CASE("short streams flush with the statistics seen so far") {
  std::mt19937_64 rng(3);
  const Tensor x = oracle::RandomTensor({40, 5}, rng);
  CHECK(MaxRelError(RtnBatch(x), oracle::RtnRecompute(x, 125, 1e-6)) <= 1e-9);
}

TEST_CASE("sliding windows equal the windowed recompute") {
  std::mt19937_64 rng(4);
  for (std::size_t window : {125u, 200u, 500u}) {
    const Tensor x = oracle::RandomTensor({900, 6}, rng, -2, 2);
    CHECK(MaxRelError(RtnBatch(x, RtnConfig::Sliding(window)),
                      oracle::RtnRecompute(x, 125, 1e-6, window)) <= 1e-9);
  }
}

TEST_CASE("affine inputs normalize alike after warm-up") {
  std::mt19937_64 rng(5);
  const Tensor x = oracle::RandomTensor({500, 8}, rng, -1, 1);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] + 7.0;
  const Tensor nx = RtnBatch(x), ny = RtnBatch(y);
  for (std::size_t i = 125 * 8; i < x.size(); ++i) CHECK(std::abs(nx[i] - ny[i]) <= 1e-3);
}

TEST_CASE("feature permutation commutes") {
  std::mt19937_64 rng(6);
  const Tensor x = oracle::RandomTensor({200, 4}, rng);
  Tensor p(x.shape());
  const std::size_t perm[] = {2, 0, 3, 1};
  for (std::size_t t = 0; t < 200; ++t)
    for (std::size_t i = 0; i < 4; ++i) p[t * 4 + i] = x[t * 4 + perm[i]];
  const Tensor nx = RtnBatch(x), np = RtnBatch(p);
  for (std::size_t t = 0; t < 200; ++t)
    for (std::size_t i = 0; i < 4; ++i) CHECK(np[t * 4 + i] == nx[t * 4 + perm[i]]);
}

TEST_CASE("causal after warm-up") {
  std::mt19937_64 rng(7);
  const Tensor x = oracle::RandomTensor({300, 3}, rng);
  Tensor y = x;
  for (std::size_t i = 200 * 3; i < y.size(); ++i) y[i] += 5;
  const Tensor nx = RtnBatch(x), ny = RtnBatch(y);
  for (std::size_t i = 0; i < 200 * 3; ++i) CHECK(nx[i] == ny[i]);
}

}  // TEST_SUITE
