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

#ifndef EMGTYPE_RNG_HPP_
#define EMGTYPE_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace emgtype {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t MixBits(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a root seed and a path of
// indices, e.g. (seed, batch, sample, electrode). Streams depend only on
// the path, never on the order in which they are drawn.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = MixBits(seed);
  for (std::uint64_t p : path) h = MixBits(h ^ MixBits(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng MakeRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng(DeriveSeed(seed, path));
}

// Uniform integer on the closed range [lo, hi].
template <typename Int>
Int UniformInt(Rng &rng, Int lo, Int hi) {
  return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

}  // namespace emgtype

#endif  // EMGTYPE_RNG_HPP_
