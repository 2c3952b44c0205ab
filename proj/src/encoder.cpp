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

#include "emgtype/encoder.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>

#include "emgtype/error.hpp"
#include "emgtype/frontend.hpp"
#include "emgtype/rng.hpp"

namespace emgtype {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

const char *HandPrefix(std::size_t hand) { return hand == 0 ? "left." : "right."; }

std::string StackPrefix(const ModelConfig &c, std::size_t stream) {
  return c.split() ? HandPrefix(stream) : "joint.";
}

// Per-lag K x K matrices of a Conv2d kernel stored [K x K x 1 x w].
struct ConvKernel {
  std::vector<RowMatrix> lags;  // lags[i] multiplies x[t - i]
  Eigen::VectorXd bias;
  std::size_t channels = 0;
  std::size_t width = 0;

  ConvKernel(const Tensor &kernel, const Tensor &b, std::size_t K) : channels(K) {
    const Shape &s = kernel.shape();
    if (s.size() != 4 || s[0] != K || s[1] != K || s[2] != 1)
      ThrowUsage("conv kernel must be [K x K x 1 x w], got " + ShapeToString(s));
    if (b.size() != K) ThrowUsage("conv bias must have K entries");
    width = s[3];
    lags.assign(width, RowMatrix(K, K));
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t kp = 0; kp < K; ++kp)
        for (std::size_t j = 0; j < width; ++j)
          lags[width - 1 - j](k, kp) = kernel[(k * K + kp) * width + j];
    bias = Eigen::Map<const Eigen::VectorXd>(b.data(), K);
  }

  // out (D values, channel-major) = bias + sum_i lags[i] * input(i).
  // input(i) returns the frame i steps back or nullptr for zero padding.
  template <typename Input>
  void Apply(std::size_t D, Input input, double *out) const {
    const std::size_t H = D / channels;
    RowMap z(out, channels, H);
    z = bias.replicate(1, H);
    for (std::size_t i = 0; i < width; ++i) {
      const double *x = input(i);
      if (x == nullptr) continue;
      z.noalias() += lags[i] * ConstRowMap(x, channels, H);
    }
  }
};

void LayerNormInPlace(double *row, std::size_t D, const LayerNormParams &p) {
  if (p.scale == nullptr) return;
  double mean = 0.0;
  for (std::size_t i = 0; i < D; ++i) mean += row[i];
  mean /= D;
  double var = 0.0;
  for (std::size_t i = 0; i < D; ++i) var += (row[i] - mean) * (row[i] - mean);
  var /= D;
  const double inv = 1.0 / std::sqrt(var + p.eps);
  for (std::size_t i = 0; i < D; ++i) {
    row[i] = (row[i] - mean) * inv * (*p.scale)[i];
    if (p.shift) row[i] += (*p.shift)[i];
  }
}

// ReLU(conv) + residual, then LayerNorm, for one frame.
void FinishConvFrame(const double *x, double *z, std::size_t D, const LayerNormParams &norm) {
  for (std::size_t i = 0; i < D; ++i) z[i] = std::max(z[i], 0.0) + x[i];
  LayerNormInPlace(z, D, norm);
}

Tensor HandSlice(const Tensor &features, std::size_t hand) {
  const std::size_t T = features.dim(0), F = features.dim(3);
  const std::size_t per_hand = kNumChannels * F;
  Tensor out({T, kNumChannels, F});
  for (std::size_t t = 0; t < T; ++t)
    std::copy_n(features.data() + (t * kNumBands + hand) * per_hand, per_hand,
                out.data() + t * per_hand);
  return out;
}

Tensor ConcatColumns(const Tensor &a, const Tensor &b) {
  const std::size_t T = a.dim(0), da = a.dim(1), db = b.dim(1);
  Tensor out({T, da + db});
  for (std::size_t t = 0; t < T; ++t) {
    std::copy_n(a.data() + t * da, da, out.data() + t * (da + db));
    std::copy_n(b.data() + t * db, db, out.data() + t * (da + db) + da);
  }
  return out;
}

}  // namespace

const char *VariantName(Variant v) {
  switch (v) {
    case Variant::kJointHand: return "joint_hand";
    case Variant::kSplitOnly: return "split_only";
    case Variant::kSplitAndShare: return "split_and_share";
    case Variant::kSplashNet: return "splashnet";
  }
  return "unknown";
}

Variant ParseVariant(const std::string &name) {
  if (name == "joint_hand") return Variant::kJointHand;
  if (name == "split_only") return Variant::kSplitOnly;
  if (name == "split_and_share") return Variant::kSplitAndShare;
  if (name == "splashnet") return Variant::kSplashNet;
  ThrowUsage("unknown model variant '" + name + "'");
}

ModelConfig ModelConfig::Preset(const std::string &name) {
  ModelConfig c;
  if (name == "baseline") {
    c.variant = Variant::kJointHand;
    c.input_bins = kFullBins;
  } else if (name == "joint_rsg") {
    c.variant = Variant::kJointHand;
  } else if (name == "split_only") {
    c.variant = Variant::kSplitOnly;
  } else if (name == "splashnet_mini") {
    c.variant = Variant::kSplitAndShare;
  } else if (name == "splashnet") {
    c.variant = Variant::kSplashNet;
    c.embed_dim = 528;
    c.mlp_layer_sizes = {528};
    c.block_channels = {24, 24, 48, 48};
  } else {
    ThrowUsage("unknown model preset '" + name + "'");
  }
  return c;
}

std::size_t ModelConfig::mlp_input_width() const { return kNumChannels * input_bins; }

std::size_t ModelConfig::receptive_field() const {
  return 1 + block_channels.size() * (kernel_width - 1);
}

void ModelConfig::Validate() const {
  if (embed_dim == 0) ThrowUsage("embed_dim must be positive");
  if (kernel_width < 1) ThrowUsage("kernel_width must be >= 1");
  if (vocab_size < 2) ThrowUsage("vocab_size must be >= 2");
  if (input_bins < 1) ThrowUsage("input_bins must be >= 1");
  if (mlp_layer_sizes.empty() || mlp_layer_sizes.back() != embed_dim)
    ThrowUsage("the last MLP layer must produce embed_dim features");
  if (offsets.empty()) ThrowUsage("rotation offsets must not be empty");
  for (int o : offsets)
    if (std::abs(o) >= static_cast<int>(kNumChannels))
      ThrowUsage("rotation offset " + std::to_string(o) + " must satisfy |o| < 16");
  for (std::size_t K : block_channels)
    if (K == 0 || stack_width() % K != 0)
      ThrowUsage("stack width " + std::to_string(stack_width()) +
                 " not divisible by block channels " + std::to_string(K));
}

std::vector<TensorSpec> ExpectedTensors(const ModelConfig &c) {
  c.Validate();
  std::vector<TensorSpec> specs;
  auto add = [&](const std::string &name, Shape shape, std::optional<std::string> alias) {
    specs.push_back({name, std::move(shape), std::move(alias)});
  };
  // Aliases right.* onto left.* for shared variants.
  auto alias_of = [&](const std::string &name, std::size_t hand) -> std::optional<std::string> {
    if (hand == 1 && c.shared()) return "left." + name.substr(std::string("right.").size());
    return std::nullopt;
  };
  auto add_mlp = [&](std::size_t hand) {
    std::size_t in = c.mlp_input_width();
    for (std::size_t i = 0; i < c.mlp_layer_sizes.size(); ++i) {
      const std::size_t out = c.mlp_layer_sizes[i];
      const std::string p = std::string(HandPrefix(hand)) + "mlp." + std::to_string(i);
      add(p + ".weight", {out, in}, alias_of(p + ".weight", hand));
      add(p + ".bias", {out}, alias_of(p + ".bias", hand));
      in = out;
    }
  };
  auto add_blocks = [&](std::size_t stream) {
    const std::size_t D = c.stack_width();
    for (std::size_t j = 0; j < c.block_channels.size(); ++j) {
      const std::size_t K = c.block_channels[j];
      const std::string p = StackPrefix(c, stream) + "block" + std::to_string(j);
      const std::pair<std::string, Shape> leaves[] = {
          {".conv.weight", {K, K, 1, c.kernel_width}},
          {".conv.bias", {K}},
          {".conv_norm.weight", {D}},
          {".conv_norm.bias", {D}},
          {".fc1.weight", {D, D}},
          {".fc1.bias", {D}},
          {".fc2.weight", {D, D}},
          {".fc2.bias", {D}},
          {".fc_norm.weight", {D}},
          {".fc_norm.bias", {D}},
      };
      for (const auto &[leaf, shape] : leaves) add(p + leaf, shape, alias_of(p + leaf, stream));
    }
  };
  if (c.split()) {
    for (std::size_t hand = 0; hand < 2; ++hand) {
      add_mlp(hand);
      add_blocks(hand);
    }
  } else {
    add_mlp(0);
    add_mlp(1);
    add_blocks(0);
  }
  add("head.weight", {c.vocab_size, 2 * c.embed_dim}, std::nullopt);
  add("head.bias", {c.vocab_size}, std::nullopt);
  return specs;
}

void WeightStore::Set(const std::string &name, Tensor value) {
  tensors_[name] = std::make_shared<const Tensor>(std::move(value));
}

void WeightStore::Alias(const std::string &name, const std::string &target) {
  tensors_[name] = Ptr(target);
}

const Tensor &WeightStore::Get(const std::string &name) const { return *Ptr(name); }

std::shared_ptr<const Tensor> WeightStore::Ptr(const std::string &name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) ThrowData("missing tensor '" + name + "'");
  return it->second;
}

std::vector<std::string> WeightStore::Names() const {
  std::vector<std::string> names;
  for (const auto &kv : tensors_) names.push_back(kv.first);
  return names;
}

void ValidateWeights(const ModelConfig &config, const WeightStore &weights) {
  const auto specs = ExpectedTensors(config);
  for (const TensorSpec &spec : specs) {
    const auto ptr = weights.Ptr(spec.name);
    if (ptr->shape() != spec.shape) {
      ThrowData("tensor '" + spec.name + "' has shape " + ShapeToString(ptr->shape()) +
                ", expected " + ShapeToString(spec.shape));
    }
    if (!ptr->AllFinite()) ThrowNumeric("tensor '" + spec.name + "' has non-finite values");
    if (spec.alias_of && ptr != weights.Ptr(*spec.alias_of))
      ThrowData("sharing violated: '" + spec.name + "' is not '" + *spec.alias_of + "'");
  }
  if (weights.size() != specs.size()) {
    for (const std::string &name : weights.Names()) {
      const bool known = std::any_of(specs.begin(), specs.end(),
                                     [&](const TensorSpec &s) { return s.name == name; });
      if (!known) ThrowData("unexpected tensor '" + name + "'");
    }
  }
}

WeightStore RandomWeights(const ModelConfig &config, std::uint64_t seed) {
  WeightStore store;
  const auto specs = ExpectedTensors(config);
  std::map<std::string, std::size_t> fan_in;
  for (const TensorSpec &s : specs) {
    if (s.shape.size() == 2) fan_in[s.name] = s.shape[1];
    if (s.shape.size() == 4) fan_in[s.name] = s.shape[1] * s.shape[3];
  }
  std::uint64_t index = 0;
  for (const TensorSpec &s : specs) {
    ++index;
    if (s.alias_of) {
      store.Alias(s.name, *s.alias_of);
      continue;
    }
    Tensor t(s.shape);
    const bool is_norm = s.name.find("norm.") != std::string::npos;
    const bool is_bias = s.name.size() > 5 && s.name.ends_with(".bias");
    if (is_norm) {
      if (!is_bias) std::fill(t.values().begin(), t.values().end(), 1.0);
    } else {
      const std::string weight_name =
          is_bias ? s.name.substr(0, s.name.size() - 5) + ".weight" : s.name;
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in.at(weight_name)));
      Rng rng = MakeRng(seed, {index});
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double &v : t.values()) v = static_cast<float>(dist(rng));
    }
    store.Set(s.name, std::move(t));
  }
  return store;
}

Tensor LinearForward(const Tensor &x, const LinearParams &p) {
  const std::size_t out = p.weight->dim(0), in = p.weight->dim(1);
  if (x.rank() != 2 || x.dim(1) != in)
    ThrowUsage("linear input " + ShapeToString(x.shape()) + " does not match weight " +
               ShapeToString(p.weight->shape()));
  if (p.bias && p.bias->size() != out) ThrowUsage("linear bias size mismatch");
  const std::size_t T = x.dim(0);
  Tensor y({T, out});
  if (T == 0) return y;
  RowMap Y(y.data(), T, out);
  Y.noalias() = ConstRowMap(x.data(), T, in) * ConstRowMap(p.weight->data(), out, in).transpose();
  if (p.bias) Y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p.bias->data(), out);
  return y;
}

Tensor LayerNormRows(const Tensor &x, const LayerNormParams &p) {
  Tensor y = x;
  const std::size_t D = x.row_size();
  if (p.scale && p.scale->size() != D) ThrowUsage("LayerNorm size mismatch");
  for (std::size_t t = 0; t < x.dim(0); ++t) LayerNormInPlace(y.row(t).data(), D, p);
  return y;
}

Tensor RimlpForward(const Tensor &hand, std::span<const LinearParams> mlp,
                    std::span<const int> offsets) {
  if (hand.rank() != 3) ThrowUsage("RIMLP expects [T x C x F]");
  if (mlp.empty() || offsets.empty()) ThrowUsage("RIMLP needs layers and offsets");
  const std::size_t T = hand.dim(0), C = hand.dim(1), F = hand.dim(2);
  for (int o : offsets)
    if (std::abs(o) >= static_cast<int>(C))
      ThrowUsage("rotation offset " + std::to_string(o) + " must satisfy |o| < C");
  const std::size_t D = mlp.back().weight->dim(0);
  Tensor sum({T, D});
  for (int o : offsets) {
    Tensor rolled({T, C * F});
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < C; ++c) {
        const int ci = static_cast<int>(c), Ci = static_cast<int>(C);
        const std::size_t src = static_cast<std::size_t>(((ci - o) % Ci + Ci) % Ci);
        std::copy_n(hand.data() + (t * C + src) * F, F, rolled.data() + (t * C + c) * F);
      }
    Tensor h = std::move(rolled);
    for (const LinearParams &layer : mlp) {
      h = LinearForward(h, layer);
      for (double &v : h.values()) v = std::max(v, 0.0);
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h[i];
  }
  const double scale = 1.0 / static_cast<double>(offsets.size());
  for (double &v : sum.values()) v *= scale;
  return sum;
}

Tensor TdsConvBlock(const Tensor &x, const Tensor &kernel, const Tensor &bias,
                    const LayerNormParams &norm, std::size_t channels) {
  if (x.rank() != 2) ThrowUsage("TDS conv block expects [T x D]");
  const std::size_t T = x.dim(0), D = x.dim(1);
  if (channels == 0 || D % channels != 0)
    ThrowUsage("feature width " + std::to_string(D) + " not divisible by " +
               std::to_string(channels) + " channels");
  if (norm.scale && norm.scale->size() != D) ThrowUsage("LayerNorm size mismatch");
  const ConvKernel conv(kernel, bias, channels);
  Tensor y({T, D});
  for (std::size_t t = 0; t < T; ++t) {
    conv.Apply(
        D, [&](std::size_t lag) { return lag <= t ? x.data() + (t - lag) * D : nullptr; },
        y.data() + t * D);
    FinishConvFrame(x.data() + t * D, y.data() + t * D, D, norm);
  }
  return y;
}

Tensor TdsFcBlock(const Tensor &x, const LinearParams &fc1, const LinearParams &fc2,
                  const LayerNormParams &norm) {
  const std::size_t D = x.rank() == 2 ? x.dim(1) : 0;
  if (fc1.weight->shape() != Shape{D, D} || fc2.weight->shape() != Shape{D, D})
    ThrowUsage("FC block weights must be [D x D] for input " + ShapeToString(x.shape()));
  Tensor h = LinearForward(x, fc1);
  for (double &v : h.values()) v = std::max(v, 0.0);
  Tensor y = LinearForward(h, fc2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return LayerNormRows(y, norm);
}

Encoder::Encoder(ModelConfig config, WeightStore weights)
    : config_(std::move(config)), weights_(std::move(weights)) {
  config_.Validate();
  ValidateWeights(config_, weights_);
  auto linear = [&](const std::string &p) {
    return LinearParams{weights_.Ptr(p + ".weight").get(), weights_.Ptr(p + ".bias").get()};
  };
  auto norm = [&](const std::string &p) {
    return LayerNormParams{weights_.Ptr(p + ".weight").get(), weights_.Ptr(p + ".bias").get(),
                           config_.layer_norm_eps};
  };
  for (std::size_t hand = 0; hand < 2; ++hand)
    for (std::size_t i = 0; i < config_.mlp_layer_sizes.size(); ++i)
      mlp_[hand].push_back(linear(std::string(HandPrefix(hand)) + "mlp." + std::to_string(i)));
  for (std::size_t s = 0; s < config_.num_streams(); ++s) {
    for (std::size_t j = 0; j < config_.block_channels.size(); ++j) {
      const std::string p = StackPrefix(config_, s) + "block" + std::to_string(j);
      TdsBlockParams b;
      b.channels = config_.block_channels[j];
      b.conv_kernel = weights_.Ptr(p + ".conv.weight").get();
      b.conv_bias = weights_.Ptr(p + ".conv.bias").get();
      b.conv_norm = norm(p + ".conv_norm");
      b.fc1 = linear(p + ".fc1");
      b.fc2 = linear(p + ".fc2");
      b.fc_norm = norm(p + ".fc_norm");
      blocks_[s].push_back(b);
    }
  }
  head_ = linear("head");
}

Tensor Encoder::RunStack(const Tensor &x, std::size_t stream) const {
  Tensor h = x;
  for (const TdsBlockParams &b : blocks_[stream]) {
    h = TdsConvBlock(h, *b.conv_kernel, *b.conv_bias, b.conv_norm, b.channels);
    h = TdsFcBlock(h, b.fc1, b.fc2, b.fc_norm);
  }
  return h;
}

Tensor Encoder::Forward(const Tensor &features, EncoderTrace *trace) const {
  const Shape &s = features.shape();
  if (s.size() != 4 || s[1] != kNumBands || s[2] != kNumChannels || s[3] != config_.input_bins) {
    ThrowUsage("encoder expects [T x 2 x 16 x " + std::to_string(config_.input_bins) +
               "], got " + ShapeToString(s));
  }
  Tensor left = RimlpForward(HandSlice(features, 0), mlp_[0], config_.offsets);
  Tensor right = RimlpForward(HandSlice(features, 1), mlp_[1], config_.offsets);
  Tensor merged;
  if (config_.split()) {
    Tensor ls = RunStack(left, 0);
    Tensor rs = RunStack(right, 1);
    merged = ConcatColumns(ls, rs);
    if (trace) {
      trace->left_stream = std::move(ls);
      trace->right_stream = std::move(rs);
    }
  } else {
    merged = RunStack(ConcatColumns(left, right), 0);
    if (trace) trace->joint_stream = merged;
  }
  if (trace) {
    trace->left_embedding = std::move(left);
    trace->right_embedding = std::move(right);
  }
  return LinearForward(merged, head_);
}

struct StreamingEncoder::Impl {
  std::shared_ptr<const Encoder> encoder;
  // Per stream, per block: kernel and ring of the last w-1 block inputs.
  struct BlockState {
    const TdsBlockParams *params;
    ConvKernel conv;
    std::deque<std::vector<double>> history;  // most recent at back
  };
  std::vector<std::vector<BlockState>> streams;
  std::size_t frames = 0;

  std::vector<double> StackStep(std::vector<double> x, std::size_t stream) {
    const std::size_t D = x.size();
    for (BlockState &b : streams[stream]) {
      const std::size_t w = b.conv.width;
      std::vector<double> z(D);
      b.conv.Apply(
          D,
          [&](std::size_t lag) -> const double * {
            if (lag == 0) return x.data();
            if (lag > b.history.size()) return nullptr;
            return b.history[b.history.size() - lag].data();
          },
          z.data());
      FinishConvFrame(x.data(), z.data(), D, b.params->conv_norm);
      if (w > 1) {
        b.history.push_back(std::move(x));
        if (b.history.size() > w - 1) b.history.pop_front();
      }
      Tensor row({1, D}, std::move(z));
      const Tensor fc = TdsFcBlock(row, b.params->fc1, b.params->fc2, b.params->fc_norm);
      x.assign(fc.values().begin(), fc.values().end());
    }
    return x;
  }
};

StreamingEncoder::StreamingEncoder(std::shared_ptr<const Encoder> encoder)
    : impl_(std::make_unique<Impl>()) {
  impl_->encoder = std::move(encoder);
  const Encoder &e = *impl_->encoder;
  for (std::size_t s = 0; s < e.config().num_streams(); ++s) {
    std::vector<Impl::BlockState> blocks;
    for (const TdsBlockParams &b : e.blocks(s))
      blocks.push_back({&b, ConvKernel(*b.conv_kernel, *b.conv_bias, b.channels), {}});
    impl_->streams.push_back(std::move(blocks));
  }
}
StreamingEncoder::~StreamingEncoder() = default;
StreamingEncoder::StreamingEncoder(StreamingEncoder &&) noexcept = default;
StreamingEncoder &StreamingEncoder::operator=(StreamingEncoder &&) noexcept = default;

std::size_t StreamingEncoder::frames_processed() const { return impl_->frames; }

std::vector<double> StreamingEncoder::Step(std::span<const double> frame) {
  const Encoder &e = *impl_->encoder;
  const ModelConfig &c = e.config();
  const std::size_t F = c.input_bins;
  if (frame.size() != kNumElectrodes * F)
    ThrowUsage("streaming frame has " + std::to_string(frame.size()) + " values, expected " +
               std::to_string(kNumElectrodes * F));
  std::vector<double> emb[2];
  for (std::size_t hand = 0; hand < 2; ++hand) {
    Tensor h({1, kNumChannels, F},
             std::vector<double>(frame.begin() + hand * kNumChannels * F,
                                 frame.begin() + (hand + 1) * kNumChannels * F));
    Tensor out = RimlpForward(h, e.mlp(hand), c.offsets);
    emb[hand].assign(out.values().begin(), out.values().end());
  }
  std::vector<double> merged;
  if (c.split()) {
    merged = impl_->StackStep(std::move(emb[0]), 0);
    std::vector<double> r = impl_->StackStep(std::move(emb[1]), 1);
    merged.insert(merged.end(), r.begin(), r.end());
  } else {
    merged = std::move(emb[0]);
    merged.insert(merged.end(), emb[1].begin(), emb[1].end());
    merged = impl_->StackStep(std::move(merged), 0);
  }
  const std::size_t width = merged.size();
  Tensor logits = LinearForward(Tensor({1, width}, std::move(merged)), e.head());
  ++impl_->frames;
  return std::vector<double>(logits.values().begin(), logits.values().end());
}

}  // namespace emgtype
