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

#ifndef EMGTYPE_NORMALIZE_HPP_
#define EMGTYPE_NORMALIZE_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "emgtype/tensor.hpp"

namespace emgtype {

struct RtnConfig {
  std::size_t warmup_frames = 125;
  double epsilon = 1e-6;
  // 0 selects cumulative statistics; otherwise statistics cover the most
  // recent `window_frames` frames once past warm-up.
  std::size_t window_frames = 0;

  static RtnConfig Sliding(std::size_t frames) {
    RtnConfig c;
    c.window_frames = frames;
    return c;
  }
  bool sliding() const { return window_frames != 0; }
  void Validate() const;
};

// Causal per-feature z-scoring.
//
// The first warmup_frames frames are held back and released together once
// the warm-up window is full, all normalized with the statistics of that
// whole window. Every later frame is released immediately, normalized with
// the running mean and deviation up to and including itself:
//
//   mu_t    = mean(x_0..x_t)
//   sigma_t = sqrt(mean(x_0^2..x_t^2) - mu_t^2 + epsilon)
//
// In sliding mode the sums run over the last window_frames frames instead,
// maintained by subtracting evicted frames from a ring buffer.
class RollingNormalizer {
 public:
  RollingNormalizer(const RtnConfig &config, std::size_t num_features);

  // Returns zero, one, or warmup_frames normalized frames.
  std::vector<std::vector<double>> Push(std::span<const double> frame);

  // Releases frames still buffered in an unfinished warm-up, normalized
  // with the statistics of the frames seen so far.
  std::vector<std::vector<double>> Flush();

  std::size_t num_features() const { return num_features_; }
  std::size_t frames_seen() const { return count_; }
  bool warmed_up() const { return warmed_up_; }
  const RtnConfig &config() const { return config_; }
  const std::vector<double> &frozen_mean() const { return frozen_mean_; }
  const std::vector<double> &frozen_sigma() const { return frozen_sigma_; }

 private:
  void Accumulate(std::span<const double> frame);
  void CurrentStats(std::vector<double> &mean, std::vector<double> &sigma) const;
  std::vector<std::vector<double>> ReleaseWarmup();

  RtnConfig config_;
  std::size_t num_features_;
  std::size_t count_ = 0;
  bool warmed_up_ = false;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
  std::vector<double> frozen_mean_;
  std::vector<double> frozen_sigma_;
  std::vector<std::vector<double>> warmup_buffer_;
  // Sliding mode only: the last window_frames frames.
  std::vector<std::vector<double>> ring_;
  std::size_t ring_head_ = 0;
};

// Folds RollingNormalizer over the leading (time) axis of `frames`.
Tensor RtnBatch(const Tensor &frames, const RtnConfig &config = {});

}  // namespace emgtype

#endif  // EMGTYPE_NORMALIZE_HPP_
