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

#include "emgtype/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emgtype/error.hpp"

namespace emgtype {

void RtnConfig::Validate() const {
  if (warmup_frames < 1) ThrowUsage("RTN warmup_frames must be >= 1");
  if (!(epsilon > 0.0)) ThrowUsage("RTN epsilon must be > 0");
  if (sliding() && window_frames < warmup_frames)
    ThrowUsage("RTN sliding window must cover at least the warm-up");
}

RollingNormalizer::RollingNormalizer(const RtnConfig &config, std::size_t num_features)
    : config_(config),
      num_features_(num_features),
      sum_(num_features, 0.0),
      sum_sq_(num_features, 0.0) {
  config_.Validate();
  if (num_features == 0) ThrowUsage("RTN needs at least one feature");
  if (config_.sliding()) ring_.reserve(config_.window_frames);
}

void RollingNormalizer::Accumulate(std::span<const double> frame) {
  if (config_.sliding()) {
    if (ring_.size() < config_.window_frames) {
      ring_.emplace_back(frame.begin(), frame.end());
    } else {
      std::vector<double> &old = ring_[ring_head_];
      for (std::size_t i = 0; i < num_features_; ++i) {
        sum_[i] -= old[i];
        sum_sq_[i] -= old[i] * old[i];
      }
      std::copy(frame.begin(), frame.end(), old.begin());
      ring_head_ = (ring_head_ + 1) % config_.window_frames;
    }
  }
  for (std::size_t i = 0; i < num_features_; ++i) {
    sum_[i] += frame[i];
    sum_sq_[i] += frame[i] * frame[i];
  }
  ++count_;
}

void RollingNormalizer::CurrentStats(std::vector<double> &mean,
                                     std::vector<double> &sigma) const {
  const std::size_t n = config_.sliding() ? std::min(count_, config_.window_frames) : count_;
  mean.resize(num_features_);
  sigma.resize(num_features_);
  for (std::size_t i = 0; i < num_features_; ++i) {
    const double mu = sum_[i] / n;
    const double var = std::max(sum_sq_[i] / n - mu * mu, 0.0);
    mean[i] = mu;
    sigma[i] = std::sqrt(var + config_.epsilon);
  }
}

std::vector<std::vector<double>> RollingNormalizer::ReleaseWarmup() {
  CurrentStats(frozen_mean_, frozen_sigma_);
  std::vector<std::vector<double>> out = std::move(warmup_buffer_);
  warmup_buffer_.clear();
  for (auto &frame : out)
    for (std::size_t i = 0; i < num_features_; ++i)
      frame[i] = (frame[i] - frozen_mean_[i]) / frozen_sigma_[i];
  return out;
}

std::vector<std::vector<double>> RollingNormalizer::Push(std::span<const double> frame) {
  if (frame.size() != num_features_) {
    ThrowUsage("RTN frame has " + std::to_string(frame.size()) + " features, expected " +
               std::to_string(num_features_));
  }
  Accumulate(frame);
  if (!warmed_up_) {
    warmup_buffer_.emplace_back(frame.begin(), frame.end());
    if (count_ < config_.warmup_frames) return {};
    warmed_up_ = true;
    return ReleaseWarmup();
  }
  std::vector<double> mean, sigma;
  CurrentStats(mean, sigma);
  std::vector<double> out(num_features_);
  for (std::size_t i = 0; i < num_features_; ++i) out[i] = (frame[i] - mean[i]) / sigma[i];
  return {std::move(out)};
}

std::vector<std::vector<double>> RollingNormalizer::Flush() {
  if (warmed_up_ || warmup_buffer_.empty()) return {};
  return ReleaseWarmup();
}

Tensor RtnBatch(const Tensor &frames, const RtnConfig &config) {
  if (frames.rank() == 0 || frames.dim(0) == 0) ThrowUsage("RTN needs at least one frame");
  RollingNormalizer rtn(config, frames.row_size());
  Tensor out(frames.shape());
  std::size_t t_out = 0;
  auto drain = [&](std::vector<std::vector<double>> ready) {
    for (auto &f : ready) std::copy(f.begin(), f.end(), out.row(t_out++).begin());
  };
  for (std::size_t t = 0; t < frames.dim(0); ++t) drain(rtn.Push(frames.row(t)));
  drain(rtn.Flush());
  return out;
}

}  // namespace emgtype
