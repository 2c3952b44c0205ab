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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oracle {

std::vector<std::vector<double>> DftLogPower(const std::vector<double> &x, int n_fft, int hop,
                                             bool hann) {
  const long n = static_cast<long>(x.size());
  const long frames = (n + hop - 1) / hop;
  std::vector<std::vector<double>> out;
  for (long t = 0; t < frames; ++t) {
    const long start = hop * t + hop - n_fft;
    std::vector<double> row;
    for (int f = 0; f <= n_fft / 2; ++f) {
      double re = 0, im = 0;
      for (int m = 0; m < n_fft; ++m) {
        const long s = start + m;
        double v = (s >= 0 && s < n) ? x[s] : 0.0;
        if (hann) v *= 0.5 - 0.5 * std::cos(2 * std::numbers::pi * m / n_fft);
        const double a = -2 * std::numbers::pi * f * m / n_fft;
        re += v * std::cos(a);
        im += v * std::sin(a);
      }
      row.push_back(std::log10(re * re + im * im + 1e-6));
    }
    out.push_back(row);
  }
  return out;
}

Tensor RsgSum(const Tensor &s) {
  static const std::vector<std::vector<int>> members = {
      {1, 2}, {3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12},
      {13, 14, 15, 16, 17, 18, 19, 20, 21, 22}, {23, 24, 25, 26, 27, 28, 29, 30, 31, 32}};
  emgtype::Shape shape = s.shape();
  const std::size_t groups = s.size() / 33;
  shape.back() = 6;
  Tensor out(shape);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t b = 0; b < 6; ++b) {
      double acc = 0;
      for (int f : members[b]) acc += s[g * 33 + f];
      out[g * 6 + b] = acc;
    }
  return out;
}

Tensor RtnRecompute(const Tensor &frames, std::size_t warmup, double eps, std::size_t window) {
  const std::size_t T = frames.dim(0), N = frames.row_size();
  Tensor out(frames.shape());
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t lo = 0, hi = t;
    if (t < warmup) hi = std::min(warmup, T) - 1;
    else if (window) lo = t + 1 >= window ? t + 1 - window : 0;
    const double n = static_cast<double>(hi - lo + 1);
    for (std::size_t i = 0; i < N; ++i) {
      double mean = 0;
      for (std::size_t u = lo; u <= hi; ++u) mean += frames[u * N + i];
      mean /= n;
      double var = 0;
      for (std::size_t u = lo; u <= hi; ++u) var += (frames[u * N + i] - mean) * (frames[u * N + i] - mean);
      var /= n;
      out[t * N + i] = (frames[t * N + i] - mean) / std::sqrt(var + eps);
    }
  }
  return out;
}

Tensor Linear(const Tensor &x, const Tensor &w, const Tensor &b) {
  const std::size_t T = x.dim(0), in = w.dim(1), out = w.dim(0);
  Tensor y({T, out});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * x[t * in + i];
      y[t * out + o] = acc;
    }
  return y;
}

Tensor Relu(Tensor x) {
  for (double &v : x.values()) v = v > 0 ? v : 0;
  return x;
}

Tensor LayerNorm(const Tensor &x, const Tensor &scale, const Tensor &shift, double eps) {
  const std::size_t T = x.dim(0), D = x.dim(1);
  Tensor y(x.shape());
  for (std::size_t t = 0; t < T; ++t) {
    double mean = 0, var = 0;
    for (std::size_t d = 0; d < D; ++d) mean += x[t * D + d];
    mean /= D;
    for (std::size_t d = 0; d < D; ++d) var += (x[t * D + d] - mean) * (x[t * D + d] - mean);
    var /= D;
    for (std::size_t d = 0; d < D; ++d)
      y[t * D + d] = (x[t * D + d] - mean) / std::sqrt(var + eps) * scale[d] + shift[d];
  }
  return y;
}

Tensor ConvResidual(const Tensor &x, const Tensor &kernel, const Tensor &bias) {
  const std::size_t T = x.dim(0), D = x.dim(1), K = kernel.dim(0), w = kernel.dim(3);
  const std::size_t H = D / K;
  Tensor y(x.shape());
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t h = 0; h < H; ++h) {
        double z = bias[k];
        for (std::size_t i = 0; i < w && i <= t; ++i)
          for (std::size_t kp = 0; kp < K; ++kp)
            z += kernel.at({k, kp, 0, w - 1 - i}) * x[(t - i) * D + kp * H + h];
        y[t * D + k * H + h] = std::max(z, 0.0) + x[t * D + k * H + h];
      }
  return y;
}

namespace {

Tensor Hand(const Tensor &features, std::size_t hand) {
  const std::size_t T = features.dim(0), F = features.dim(3);
  Tensor out({T, 16, F});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < 16; ++c)
      for (std::size_t f = 0; f < F; ++f) out.at({t, c, f}) = features.at({t, hand, c, f});
  return out;
}

Tensor Rimlp(const emgtype::ModelConfig &cfg, const emgtype::WeightStore &w, const Tensor &hand,
             const std::string &prefix) {
  const std::size_t T = hand.dim(0), F = hand.dim(2);
  Tensor acc({T, cfg.embed_dim});
  for (int o : cfg.offsets) {
    Tensor h({T, 16 * F});
    for (std::size_t t = 0; t < T; ++t)
      for (int c = 0; c < 16; ++c)
        for (std::size_t f = 0; f < F; ++f)
          h[t * 16 * F + c * F + f] = hand.at({t, static_cast<std::size_t>((c - o + 16) % 16), f});
    for (std::size_t i = 0; i < cfg.mlp_layer_sizes.size(); ++i) {
      const std::string p = prefix + "mlp." + std::to_string(i);
      h = Relu(Linear(h, w.Get(p + ".weight"), w.Get(p + ".bias")));
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += h[i] / cfg.offsets.size();
  }
  return acc;
}

Tensor Stack(const emgtype::ModelConfig &cfg, const emgtype::WeightStore &w, Tensor x,
             const std::string &prefix) {
  for (std::size_t j = 0; j < cfg.block_channels.size(); ++j) {
    const std::string p = prefix + "block" + std::to_string(j);
    x = LayerNorm(ConvResidual(x, w.Get(p + ".conv.weight"), w.Get(p + ".conv.bias")),
                  w.Get(p + ".conv_norm.weight"), w.Get(p + ".conv_norm.bias"), cfg.layer_norm_eps);
    Tensor inner = Linear(Relu(Linear(x, w.Get(p + ".fc1.weight"), w.Get(p + ".fc1.bias"))),
                          w.Get(p + ".fc2.weight"), w.Get(p + ".fc2.bias"));
    for (std::size_t i = 0; i < inner.size(); ++i) inner[i] += x[i];
    x = LayerNorm(inner, w.Get(p + ".fc_norm.weight"), w.Get(p + ".fc_norm.bias"),
                  cfg.layer_norm_eps);
  }
  return x;
}

Tensor Concat(const Tensor &a, const Tensor &b) {
  const std::size_t T = a.dim(0), A = a.dim(1), B = b.dim(1);
  Tensor out({T, A + B});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t i = 0; i < A; ++i) out[t * (A + B) + i] = a[t * A + i];
    for (std::size_t i = 0; i < B; ++i) out[t * (A + B) + A + i] = b[t * B + i];
  }
  return out;
}

}  // namespace

Tensor EncoderForward(const emgtype::ModelConfig &cfg, const emgtype::WeightStore &w,
                      const Tensor &features) {
  const Tensor left = Rimlp(cfg, w, Hand(features, 0), "left.");
  const Tensor right = Rimlp(cfg, w, Hand(features, 1), "right.");
  Tensor merged = cfg.split() ? Concat(Stack(cfg, w, left, "left."), Stack(cfg, w, right, "right."))
                              : Stack(cfg, w, Concat(left, right), "joint.");
  return Linear(merged, w.Get("head.weight"), w.Get("head.bias"));
}

std::map<std::vector<int>, double> PrefixMarginals(const Tensor &logp, int blank) {
  const std::size_t T = logp.dim(0), V = logp.dim(1);
  std::map<std::vector<int>, double> out;
  std::vector<std::size_t> path(T, 0);
  while (true) {
    double lp = 0;
    std::vector<int> prefix;
    int prev = -1;
    for (std::size_t t = 0; t < T; ++t) {
      const int c = static_cast<int>(path[t]);
      lp += logp.at({t, path[t]});
      if (c != blank && c != prev) prefix.push_back(c);
      prev = c;
    }
    out[prefix] += std::exp(lp);
    std::size_t t = 0;
    while (t < T && ++path[t] == V) path[t++] = 0;
    if (t == T) break;
  }
  return out;
}

double CtcLogLikelihood(const Tensor &logits, const std::vector<int> &target, int blank) {
  const std::size_t T = logits.dim(0), V = logits.dim(1);
  Tensor logp(logits.shape());
  for (std::size_t t = 0; t < T; ++t) {
    double z = 0;
    for (std::size_t v = 0; v < V; ++v) z += std::exp(logits.at({t, v}));
    for (std::size_t v = 0; v < V; ++v) logp.at({t, v}) = logits.at({t, v}) - std::log(z);
  }
  const auto marginals = PrefixMarginals(logp, blank);
  const auto it = marginals.find(target);
  return it == marginals.end() ? -INFINITY : std::log(it->second);
}

std::size_t Levenshtein(const std::u32string &a, const std::u32string &b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Tensor RandomTensor(const emgtype::Shape &shape, std::mt19937_64 &rng, double lo, double hi) {
  Tensor t(shape);
  std::uniform_real_distribution<double> d(lo, hi);
  for (double &v : t.values()) v = d(rng);
  return t;
}

}  // namespace oracle
