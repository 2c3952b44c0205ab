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

// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "emgtype/augment.hpp"
#include "emgtype/decode.hpp"
#include "emgtype/encoder.hpp"
#include "emgtype/error.hpp"
#include "emgtype/frontend.hpp"
#include "emgtype/lm.hpp"
#include "emgtype/metrics.hpp"
#include "emgtype/normalize.hpp"
#include "emgtype/pipeline.hpp"
#include "emgtype/simulate.hpp"
#include "oracles.hpp"

using namespace emgtype;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void Note(const std::string &text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

double MaxAbsDiff(const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool RunCriterion(const char *name, double budget_s, const std::function<Outcome()> &body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed >= budget_s) {
    o.pass = false;
    o.Note("over the runtime budget");
  }
  std::printf("%s %s (%s; %.2f s of %.0f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
              elapsed, budget_s);
  std::fflush(stdout);
  return o.pass;
}

// ---------------------------------------------------------------- frontend

Outcome Frontend() {
  Outcome o;
  RawEmgWindow zeros;
  zeros.samples = Tensor({2000, 2, 16});
  const Tensor z = StftLogPower(zeros);
  o.Require(z.dim(0) == 125, "125 frames per 2000 samples");
  bool all_floor = true;
  for (double v : z.values()) all_floor &= std::abs(v + 6.0) < 1e-12;
  o.Require(all_floor, "all-zero input gives -6");

  RawEmgWindow sine;
  sine.samples = Tensor({2000, 2, 16});
  for (std::size_t t = 0; t < 2000; ++t)
    for (std::size_t e = 0; e < 32; ++e)
      sine.samples[t * 32 + e] = std::sin(2 * std::numbers::pi * 250.0 * t / 2000.0 + 0.1 * e);
  const Tensor s = StftLogPower(sine);
  bool bin8 = true;
  for (std::size_t t = 3; t < s.dim(0); ++t)
    for (std::size_t e = 0; e < 32; ++e) {
      const double *row = s.data() + (t * 32 + e) * 33;
      bin8 &= std::max_element(row, row + 33) - row == 8;
    }
  o.Require(bin8, "250 Hz sine peaks in bin 8");

  const BandMap map = BuildBandMap();
  std::mt19937_64 rng(1);
  int exact = 0;
  for (int i = 0; i < 100; ++i) {
    const Tensor x = oracle::RandomTensor({5, 2, 16, 33}, rng, -6, 4);
    exact += AggregateRsg(x, map) == oracle::RsgSum(x);
  }
  o.Require(exact == 100, "RSG equals the summation oracle");
  o.Note("RSG exact on " + std::to_string(exact) + "/100");
  return o;
}

// --------------------------------------------------------------------- RTN

Tensor StreamNormalize(const Tensor &x, const RtnConfig &config) {
  RollingNormalizer rtn(config, x.row_size());
  std::vector<double> out;
  auto take = [&](const std::vector<std::vector<double>> &rows) {
    for (const auto &r : rows) out.insert(out.end(), r.begin(), r.end());
  };
  for (std::size_t t = 0; t < x.dim(0); ++t) take(rtn.Push(x.row(t)));
  take(rtn.Flush());
  return Tensor(x.shape(), std::move(out));
}

double MaxRel(const Tensor &a, const Tensor &b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return m;
}

Outcome Rtn() {
  Outcome o;
  std::mt19937_64 rng(2);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const double scale = std::exp(std::uniform_real_distribution<double>(-2, 2)(rng));
    Tensor x = oracle::RandomTensor({2000, 4}, rng, -1, 1);
    for (double &v : x.values()) v = scale * v + 3.0;
    worst = std::max(worst, MaxRel(StreamNormalize(x, {}), oracle::RtnRecompute(x, 125, 1e-6)));
  }
  o.Require(worst <= 1e-9, "streaming equals recomputation");
  o.Note("50 streams max rel " + Fmt("%.1e", worst));

  bool zero = true;
  for (double v : StreamNormalize(Tensor({2000, 4}, -4.5), {}).values()) zero &= v == 0.0;
  o.Require(zero, "constant input gives zeros");

  double affine = 0;
  for (int i = 0; i < 10; ++i) {
    const Tensor x = oracle::RandomTensor({2000, 4}, rng, -1, 1);
    Tensor y(x.shape());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = 2.5 * x[k] - 11.0;
    const Tensor nx = StreamNormalize(x, {}), ny = StreamNormalize(y, {});
    for (std::size_t k = 125 * 4; k < x.size(); ++k) affine = std::max(affine, std::abs(nx[k] - ny[k]));
  }
  o.Require(affine <= 1e-3, "affine invariance after warm-up");
  o.Note("affine " + Fmt("%.1e", affine));

  double sliding = 0;
  for (std::size_t window : {125u, 250u, 500u}) {
    const Tensor x = oracle::RandomTensor({2000, 4}, rng, -2, 2);
    sliding = std::max(sliding, MaxRel(StreamNormalize(x, RtnConfig::Sliding(window)),
                                       oracle::RtnRecompute(x, 125, 1e-6, window)));
  }
  o.Require(sliding <= 1e-9, "sliding windows equal the windowed oracle");
  o.Note("sliding max rel " + Fmt("%.1e", sliding));
  return o;
}

// --------------------------------------------------------------------- ACM

Outcome Acm() {
  Outcome o;
  const AcmStatistics s = AcmMonteCarlo(AcmConfig{}, 1000000, 3);
  o.Require(std::abs(s.erased_single_mask - 0.5) <= 0.002, "Pr[full erasure | n_f=1] = 0.500");
  o.Require(std::abs(s.full_width_two_masks - 0.75) <= 0.002, "Pr[full erasure | n_f=2] = 0.750");
  o.Note("n_f=1 " + Fmt("%.4f", s.erased_single_mask));
  o.Note("n_f=2 " + Fmt("%.4f", s.full_width_two_masks));
  o.Note("n_f=2 union covers all " + Fmt("%.4f", s.union_erased_two_masks));
  o.Note("masked fraction: all batches " + Fmt("%.4f", s.masked_fraction_all) +
         ", gated batches " + Fmt("%.4f", s.masked_fraction_gated) + ", n_f>=1 " +
         Fmt("%.4f", s.masked_fraction_nonzero) + " vs the ~55% figure");
  return o;
}

// ----------------------------------------------------------------- encoder

ModelConfig SmallModel(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.embed_dim = 24;
  c.mlp_layer_sizes = {24};
  c.block_channels = v == Variant::kJointHand ? std::vector<std::size_t>{8, 8}
                                              : std::vector<std::size_t>{4, 6};
  c.kernel_width = 5;
  c.vocab_size = 9;
  return c;
}

Outcome EncoderSuite() {
  Outcome o;
  std::mt19937_64 rng(4);

  // Definitional RIMLP: mean over offsets of ReLU(W roll(x) + b).
  {
    const Tensor hand = oracle::RandomTensor({8, 16, 6}, rng);
    const Tensor w = oracle::RandomTensor({20, 96}, rng), b = oracle::RandomTensor({20}, rng);
    const LinearParams layer{&w, &b};
    const int offsets[] = {-1, 0, 1};
    Tensor expect({8, 20});
    for (int off : offsets) {
      Tensor rolled({8, 96});
      for (std::size_t t = 0; t < 8; ++t)
        for (int c = 0; c < 16; ++c)
          for (std::size_t f = 0; f < 6; ++f)
            rolled[t * 96 + c * 6 + f] = hand.at({t, static_cast<std::size_t>((c - off + 16) % 16), f});
      const Tensor h = oracle::Relu(oracle::Linear(rolled, w, b));
      for (std::size_t i = 0; i < h.size(); ++i) expect[i] += h[i] / 3.0;
    }
    o.Require(MaxAbsDiff(RimlpForward(hand, std::span(&layer, 1), offsets), expect) < 1e-12,
              "RIMLP definition");

    std::vector<int> all(16);
    for (int k = 0; k < 16; ++k) all[k] = k;
    Tensor rotated(hand.shape());
    for (std::size_t t = 0; t < 8; ++t)
      for (std::size_t c = 0; c < 16; ++c)
        for (std::size_t f = 0; f < 6; ++f) rotated.at({t, (c + 3) % 16, f}) = hand.at({t, c, f});
    const double rot = MaxAbsDiff(RimlpForward(hand, std::span(&layer, 1), all),
                                  RimlpForward(rotated, std::span(&layer, 1), all));
    o.Require(rot <= 1e-9, "full-offset rotation invariance");
    o.Note("rotation " + Fmt("%.1e", rot));
  }

  // Impulse response support of the conv block.
  {
    const std::size_t T = 64, t0 = 20, w = 32;
    Tensor x({T, 48});
    x.at({t0, 7}) = 1.0;
    const Tensor kernel({24, 24, 1, w}, 0.01), bias({24}), one({48}, 1.0), zero({48});
    const Tensor y = TdsConvBlock(x, kernel, bias, {&one, &zero, 1e-5}, 24);
    bool support = true;
    for (std::size_t t = 0; t < T; ++t) {
      bool nonzero = false;
      for (double v : y.row(t)) nonzero |= v != 0.0;
      support &= nonzero == (t >= t0 && t <= t0 + w - 1);
    }
    o.Require(support, "impulse response support [t0, t0+w-1]");
  }

  // Causality at 20 random frames per variant.
  int perturbations = 0;
  for (Variant v : {Variant::kJointHand, Variant::kSplitOnly, Variant::kSplitAndShare,
                    Variant::kSplashNet}) {
    const ModelConfig c = SmallModel(v);
    const Encoder enc(c, RandomWeights(c, 5));
    const Tensor x = oracle::RandomTensor({40, 2, 16, 6}, rng);
    const Tensor base = enc.Forward(x);
    for (int k = 0; k < 20; ++k) {
      const std::size_t t0 = std::uniform_int_distribution<std::size_t>(1, 39)(rng);
      Tensor y = x;
      for (std::size_t i = t0 * y.row_size(); i < y.size(); ++i) y[i] -= 2.0;
      const Tensor out = enc.Forward(y);
      bool causal = true;
      for (std::size_t i = 0; i < t0 * out.row_size(); ++i) causal &= out[i] == base[i];
      o.Require(causal, std::string("causality for ") + VariantName(v));
      ++perturbations;
    }
  }
  o.Note(std::to_string(perturbations) + " causality perturbations");

  // Stream symmetry under hand swap with shared weights.
  {
    const ModelConfig c = ModelConfig::Preset("splashnet_mini");
    const Encoder enc(c, RandomWeights(c, 6));
    const Tensor x = oracle::RandomTensor({140, 2, 16, 6}, rng);
    Tensor swapped(x.shape());
    for (std::size_t t = 0; t < 140; ++t)
      for (std::size_t h = 0; h < 2; ++h)
        for (std::size_t i = 0; i < 96; ++i) swapped[(t * 2 + h) * 96 + i] = x[(t * 2 + 1 - h) * 96 + i];
    EncoderTrace a, b;
    const Tensor base = enc.Forward(x, &a);
    enc.Forward(swapped, &b);
    o.Require(a.left_stream == b.right_stream && a.right_stream == b.left_stream,
              "split_and_share stream symmetry");

    // Receptive field: perturbing frame 0 reaches frame 124 but not 125.
    Tensor y = x;
    for (std::size_t i = 0; i < y.row_size(); ++i) y[i] += 1.0;
    const Tensor out = enc.Forward(y);
    std::size_t last = 0;
    for (std::size_t t = 0; t < 140; ++t)
      for (std::size_t v = 0; v < out.row_size(); ++v)
        if (out.at({t, v}) != base.at({t, v})) last = t;
    o.Require(c.receptive_field() == 125 && last + 1 == 125, "receptive field of 125 frames");
    o.Note("receptive field " + std::to_string(last + 1));
  }
  return o;
}

// -------------------------------------------------------------- accounting

Outcome Accounting() {
  Outcome o;
  struct Row {
    const char *preset;
    double params, gflops;
  };
  const Row rows[] = {{"joint_rsg", 4.96e6, 54.15},  {"split_only", 2.68e6, 36.84},
                      {"splashnet_mini", 1.38e6, 36.84}, {"splashnet", 2.58e6, 71.38},
                      {"baseline", 5.29e6, 61.61}};
  for (const Row &r : rows) {
    const ModelConfig c = ModelConfig::Preset(r.preset);
    const double p = static_cast<double>(CountParams(c));
    const double engine = CountFlops(c, 30.0).gflops();
    const double ref = CountFlops(c, 30.0, FlopConvention::kReference).gflops();
    o.Require(std::abs(p - r.params) / r.params <= 0.01, std::string(r.preset) + " params");
    o.Require(std::abs(engine - r.gflops) / r.gflops <= 0.10, std::string(r.preset) + " GFLOPs");
    o.Require(std::abs(ref - r.gflops) < 0.02, std::string(r.preset) + " reference GFLOPs");
    o.Note(std::string(r.preset) + " " + Fmt("%.3fM", p / 1e6) + " " + Fmt("%.2f", engine) + "/" +
           Fmt("%.2f", ref) + " GFLOPs");
  }
  return o;
}

// ----------------------------------------------------------------- decoder

const char *kLedgerLm = R"(\data\
ngram 1=5
ngram 2=3

\1-grams:
-99	<s>	-0.3
-0.5	</s>
-0.6	a	-0.2
-0.7	b	-0.1
-0.9	c

\2-grams:
-0.1	<s> a
-0.2	a b
-0.4	b </s>

\end\
)";

Tensor Peaked(const std::vector<int> &classes, std::size_t V) {
  Tensor x({classes.size(), V});
  for (std::size_t t = 0; t < classes.size(); ++t) x.at({t, static_cast<std::size_t>(classes[t])}) = 5.0;
  return x;
}

std::vector<int> BestPathCollapse(const Tensor &logp, int blank) {
  const std::size_t T = logp.dim(0), V = logp.dim(1);
  std::vector<std::size_t> path(T, 0), best;
  double best_lp = -INFINITY;
  while (true) {
    double lp = 0;
    for (std::size_t t = 0; t < T; ++t) lp += logp.at({t, path[t]});
    if (lp > best_lp) best_lp = lp, best = path;
    std::size_t t = 0;
    while (t < T && ++path[t] == V) path[t++] = 0;
    if (t == T) break;
  }
  std::vector<int> out;
  int prev = -1;
  for (std::size_t c : best) {
    if (static_cast<int>(c) != blank && static_cast<int>(c) != prev) out.push_back(static_cast<int>(c));
    prev = static_cast<int>(c);
  }
  return out;
}

Outcome Decoder() {
  Outcome o;
  std::mt19937_64 rng(7);
  const std::vector<char32_t> letters = {U'a', U'b', U'c'};

  int beam_ok = 0, greedy_ok = 0;
  double beam_err = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t T = 1 + i % 6, V = 2 + i % 3;
    const Charset cs(std::vector<char32_t>(letters.begin(), letters.begin() + (V - 1)), V - 1);
    const Tensor logits = oracle::RandomTensor({T, V}, rng, -3, 3);
    const Tensor logp = LogSoftmaxRows(logits);
    const auto marginals = oracle::PrefixMarginals(logp, static_cast<int>(V - 1));
    auto best = marginals.begin();
    for (auto it = marginals.begin(); it != marginals.end(); ++it)
      if (it->second > best->second) best = it;
    DecodeConfig d;
    d.beam_size = 100000;
    d.lm_weight = 0;
    d.insertion_bonus = 0;
    d.blank_index = V - 1;
    const BeamResult top = BeamSearchNBest(logits, nullptr, d, cs).front();
    beam_ok += top.labels == best->first;
    beam_err = std::max(beam_err, std::abs(std::exp(top.score) - best->second));
    greedy_ok += GreedyLabels(logits, V - 1) == BestPathCollapse(logp, static_cast<int>(V - 1));
  }
  o.Require(beam_ok == 200 && beam_err <= 1e-9, "beam equals prefix-marginal argmax");
  o.Require(greedy_ok == 200, "greedy equals collapsed best path");
  o.Note("beam " + std::to_string(beam_ok) + "/200 (prob err " + Fmt("%.1e", beam_err) + ")");
  o.Note("greedy " + std::to_string(greedy_ok) + "/200");

  // Backspace ledger: surviving LM contributions plus sentence end, log10 by hand.
  {
    std::istringstream in(kLedgerLm);
    const CharLm lm = CharLm::Parse(in, "ledger.arpa");
    const Charset cs({U'a', U'b', kBackspace}, 3);
    DecodeConfig d;
    d.beam_size = 1000;
    d.lm_weight = 1.0;
    d.insertion_bonus = 0;
    d.blank_index = 3;
    struct Fixture {
      std::vector<int> frames, labels;
      double log10_lm;
    };
    const Fixture fixtures[] = {
        {{0, 3, 2, 3, 1}, {0, 2, 1}, -0.3 - 0.7 - 0.4},
        {{0, 1}, {0, 1}, -0.1 - 0.2 - 0.4},
        {{0, 1, 2}, {0, 1, 2}, -0.1 - 0.2 - 0.5},
        {{2, 0}, {2, 0}, -0.1 - 0.2 - 0.5},
        {{0, 1, 2, 3, 2, 1}, {0, 1, 2, 2, 1}, -0.3 - 0.7 - 0.4},
    };
    int ledger_ok = 0;
    for (const Fixture &f : fixtures) {
      for (const BeamResult &r : BeamSearchNBest(Peaked(f.frames, 4), &lm, d, cs))
        if (r.labels == f.labels)
          ledger_ok += std::abs(r.lm - f.log10_lm * std::numbers::ln10) < 1e-12;
    }
    o.Require(ledger_ok == 5, "backspace retraction ledger");
    o.Note("ledger " + std::to_string(ledger_ok) + "/5");
  }

  double ctc_err = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t T = 1 + i % 5, V = 2 + i % 3;
    const Tensor logits = oracle::RandomTensor({T, V}, rng, -3, 3);
    std::vector<int> target;
    const std::size_t len = std::uniform_int_distribution<std::size_t>(0, T)(rng);
    for (std::size_t k = 0; k < len; ++k) target.push_back(static_cast<int>(rng() % (V - 1)));
    const double got = CtcLogLikelihood(logits, target, V - 1).log_likelihood;
    const double want = oracle::CtcLogLikelihood(logits, target, static_cast<int>(V - 1));
    if (std::isinf(want) || std::isinf(got)) {
      if (!(std::isinf(want) && std::isinf(got))) ctc_err = INFINITY;
    } else {
      ctc_err = std::max(ctc_err, std::abs(got - want));
    }
  }
  o.Require(ctc_err <= 1e-9, "CTC likelihood equals enumeration");
  o.Note("ctc max err " + Fmt("%.1e", ctc_err));

  int cer_ok = 0;
  const std::u32string alphabet = U"abcd ⌫";
  for (int i = 0; i < 500; ++i) {
    std::u32string ref, hyp;
    const int nr = 1 + static_cast<int>(rng() % 15), nh = static_cast<int>(rng() % 16);
    for (int k = 0; k < nr; ++k) ref += alphabet[rng() % alphabet.size()];
    for (int k = 0; k < nh; ++k) hyp += alphabet[rng() % alphabet.size()];
    const CerBreakdown c = ComputeCer(ref, hyp);
    const std::size_t d = oracle::Levenshtein(ref, hyp);
    cer_ok += c.edits() == d && std::abs(c.cer - 100.0 * d / ref.size()) < 1e-12;
  }
  o.Require(cer_ok == 500, "CER equals the distance oracle");
  o.Note("cer " + std::to_string(cer_ok) + "/500");
  return o;
}

// -------------------------------------------------------------- end to end

Outcome EndToEnd() {
  Outcome o;
  const SimulationSpec spec;
  const Checkpoint rigged = OracleCheckpoint(spec.alphabet);
  auto oracle_enc = std::make_shared<const Encoder>(rigged.config, rigged.weights);
  ModelConfig small;
  small.embed_dim = 32;
  small.mlp_layer_sizes = {32};
  small.block_channels = {8, 8, 8, 8};
  auto random_enc = std::make_shared<const Encoder>(small, RandomWeights(small, 8));

  int deterministic = 0, exact = 0;
  double stream_diff = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SessionRecord s = SimulateSession(spec, seed);
    deterministic += SimulateSession(spec, seed) == s;
    for (const auto &enc : {oracle_enc, random_enc}) {
      const Tensor a = SessionLogits(s, *enc), b = SessionLogits(s, *enc);
      deterministic += a == b;
      stream_diff = std::max(stream_diff, MaxAbsDiff(StreamSessionLogits(s, enc), a));
    }
    const PipelineResult r = RunPipeline(s, *oracle_enc, {}, nullptr);
    exact += r.cer && r.cer->cer == 0.0;
  }
  o.Require(deterministic == 30, "determinism");
  o.Require(stream_diff <= 1e-5, "streaming equals batch");
  o.Require(exact == 10, "rigged head CER 0%");
  o.Note("10 sessions, stream max diff " + Fmt("%.1e", stream_diff));
  o.Note("rigged CER 0% on " + std::to_string(exact) + "/10");
  return o;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= RunCriterion("frontend oracle suite", 10, Frontend);
  ok &= RunCriterion("RTN suite", 30, Rtn);
  ok &= RunCriterion("ACM statistics", 60, Acm);
  ok &= RunCriterion("encoder suite", 60, EncoderSuite);
  ok &= RunCriterion("accounting regression", 5, Accounting);
  ok &= RunCriterion("decoder oracle suite", 120, Decoder);
  ok &= RunCriterion("end-to-end determinism and streaming", 60, EndToEnd);
  return ok ? 0 : 1;
}
