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

#ifndef EMGTYPE_ENCODER_HPP_
#define EMGTYPE_ENCODER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emgtype/tensor.hpp"

namespace emgtype {

enum class Variant { kJointHand, kSplitOnly, kSplitAndShare, kSplashNet };

const char *VariantName(Variant v);
Variant ParseVariant(const std::string &name);

struct ModelConfig {
  Variant variant = Variant::kSplitAndShare;
  std::size_t embed_dim = 384;  // D, per hand
  std::vector<std::size_t> block_channels = {24, 24, 24, 24};
  std::size_t kernel_width = 32;
  // Output sizes of the rotation-invariant MLP layers; the last is D.
  std::vector<std::size_t> mlp_layer_sizes = {384};
  std::vector<int> offsets = {-1, 0, 1};
  std::size_t vocab_size = 100;
  std::size_t input_bins = 6;  // F: 6 after RSG, 33 at full resolution
  double layer_norm_eps = 1e-5;

  // "baseline" (joint hand, 33 bins), "joint_rsg", "split_only",
  // "splashnet_mini", "splashnet".
  static ModelConfig Preset(const std::string &name);

  bool split() const { return variant != Variant::kJointHand; }
  bool shared() const {
    return variant == Variant::kSplitAndShare || variant == Variant::kSplashNet;
  }
  // Feature width the TDS stack runs at: 2D for joint hand, D per stream otherwise.
  std::size_t stack_width() const { return split() ? embed_dim : 2 * embed_dim; }
  std::size_t num_streams() const { return split() ? 2 : 1; }
  std::size_t mlp_input_width() const;
  // Frames of input history one output frame sees.
  std::size_t receptive_field() const;

  void Validate() const;
};

// Expected parameter tensor. Entries with `alias_of` share storage with an
// earlier entry (weight sharing between the two hand streams).
struct TensorSpec {
  std::string name;
  Shape shape;
  std::optional<std::string> alias_of;
};

std::vector<TensorSpec> ExpectedTensors(const ModelConfig &config);

// Named parameter tensors. Aliased names resolve to the same object.
class WeightStore {
 public:
  void Set(const std::string &name, Tensor value);
  void Alias(const std::string &name, const std::string &target);

  bool Has(const std::string &name) const { return tensors_.count(name) != 0; }
  const Tensor &Get(const std::string &name) const;
  std::shared_ptr<const Tensor> Ptr(const std::string &name) const;
  std::vector<std::string> Names() const;
  std::size_t size() const { return tensors_.size(); }

 private:
  std::map<std::string, std::shared_ptr<const Tensor>> tensors_;
};

// Checks presence, shapes, finiteness and (for shared variants) that the
// two streams resolve to identical objects. Throws kData on violation.
void ValidateWeights(const ModelConfig &config, const WeightStore &weights);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights rounded to float
// precision; LayerNorm scale 1 and shift 0.
WeightStore RandomWeights(const ModelConfig &config, std::uint64_t seed);

struct LinearParams {
  const Tensor *weight = nullptr;  // [out x in]
  const Tensor *bias = nullptr;    // [out]
};

struct LayerNormParams {
  const Tensor *scale = nullptr;
  const Tensor *shift = nullptr;
  double eps = 1e-5;
};

struct TdsBlockParams {
  std::size_t channels = 0;             // K
  const Tensor *conv_kernel = nullptr;  // [K x K x 1 x w], PyTorch Conv2d order
  const Tensor *conv_bias = nullptr;    // [K]
  LayerNormParams conv_norm;
  LinearParams fc1, fc2;
  LayerNormParams fc_norm;
};

// --- Building blocks, batch over the leading time axis. ---

// y = x W^T + b, x is [T x in].
Tensor LinearForward(const Tensor &x, const LinearParams &p);

// Row-wise LayerNorm over the feature axis.
Tensor LayerNormRows(const Tensor &x, const LayerNormParams &p);

// Mean over `offsets` of MLP(roll(hand, o)), with ReLU after every layer.
// `hand` is [T x C x F]; roll moves channel c to c + o (mod C); each
// rolled frame is flattened channel-major before the MLP.
Tensor RimlpForward(const Tensor &hand, std::span<const LinearParams> mlp,
                    std::span<const int> offsets);

// Causal time convolution mixing K channels, shared across the H = D / K
// hidden positions:
//   z[t, k, h] = bias[k] + sum_{i<w} sum_k' theta[k, k', w-1-i] x[t-i, k', h]
// followed by ReLU, a residual add and (if `norm` has a scale) LayerNorm.
// Frames before 0 read as zero.
Tensor TdsConvBlock(const Tensor &x, const Tensor &kernel, const Tensor &bias,
                    const LayerNormParams &norm, std::size_t channels);

// LayerNorm(FC2(ReLU(FC1(x))) + x); LayerNorm skipped if `norm` has no scale.
Tensor TdsFcBlock(const Tensor &x, const LinearParams &fc1, const LinearParams &fc2,
                  const LayerNormParams &norm);

// Intermediate results exposed for inspection.
struct EncoderTrace {
  Tensor left_embedding;   // RIMLP output per hand, [T x D]
  Tensor right_embedding;
  Tensor left_stream;      // split variants: per-hand TDS stack output
  Tensor right_stream;
  Tensor joint_stream;     // joint variant: shared TDS stack output
};

class Encoder {
 public:
  Encoder(ModelConfig config, WeightStore weights);

  const ModelConfig &config() const { return config_; }
  const WeightStore &weights() const { return weights_; }

  // features: [T x 2 x 16 x F] normalized log-power; returns logits [T x V].
  Tensor Forward(const Tensor &features, EncoderTrace *trace = nullptr) const;

  // Resolved parameter views. stream 0 is left, 1 is right; joint-hand
  // models only have stream 0 for blocks.
  std::span<const LinearParams> mlp(std::size_t hand) const { return mlp_[hand]; }
  std::span<const TdsBlockParams> blocks(std::size_t stream) const { return blocks_[stream]; }
  const LinearParams &head() const { return head_; }

 private:
  friend class StreamingEncoder;
  Tensor RunStack(const Tensor &x, std::size_t stream) const;

  ModelConfig config_;
  WeightStore weights_;
  std::vector<LinearParams> mlp_[2];
  std::vector<TdsBlockParams> blocks_[2];
  LinearParams head_;
};

// Frame-at-a-time forward pass. Each conv block keeps a ring of its last
// w-1 inputs per stream, so the outputs match Encoder::Forward.
class StreamingEncoder {
 public:
  explicit StreamingEncoder(std::shared_ptr<const Encoder> encoder);
  ~StreamingEncoder();
  StreamingEncoder(StreamingEncoder &&) noexcept;
  StreamingEncoder &operator=(StreamingEncoder &&) noexcept;

  // frame: [2 x 16 x F] flattened. Returns logits [V].
  std::vector<double> Step(std::span<const double> frame);
  std::size_t frames_processed() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- Analytic accounting. ---

// Parameter count over all named tensors, shared tensors once.
std::uint64_t CountParams(const ModelConfig &config);

enum class FlopConvention {
  // Engine as built: ceil(seconds * 125) frames, causally padded convs.
  kEngine,
  // PyTorch reference pipeline: uncentered STFT giving (N - 64) / 16 + 1
  // frames, and unpadded convs that drop w - 1 frames per block.
  kReference,
};

struct FlopReport {
  std::size_t input_frames = 0;
  std::uint64_t macs = 0;  // multiply-accumulates in matmuls and convs
  double flops() const { return 2.0 * static_cast<double>(macs); }
  double gflops() const { return flops() / 1e9; }
};

FlopReport CountFlops(const ModelConfig &config, double input_seconds,
                      FlopConvention convention = FlopConvention::kEngine);

}  // namespace emgtype

#endif  // EMGTYPE_ENCODER_HPP_
