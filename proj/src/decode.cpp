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

#include "emgtype/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "emgtype/error.hpp"

namespace emgtype {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Edited text as seen by the LM. Popping a character returns to the parent
// node, whose running total is restored exactly.
struct TextNode {
  SymbolId symbol = -1;
  double contribution = 0.0;  // natural log
  double total = 0.0;         // sum of contributions from the root to here
  std::shared_ptr<const TextNode> parent;
};

// Trie of label prefixes. Children are held weakly so a prefix that is
// re-derived while still alive resolves to the same node.
struct PrefixNode {
  int label = -1;
  std::size_t depth = 0;
  std::shared_ptr<PrefixNode> parent;
  std::unordered_map<int, std::weak_ptr<PrefixNode>> children;
  std::shared_ptr<const TextNode> text;

  double lm_total() const { return text ? text->total : 0.0; }
};

std::vector<int> Labels(const PrefixNode *node) {
  std::vector<int> out(node->depth);
  for (std::size_t i = node->depth; i > 0; --i, node = node->parent.get()) out[i - 1] = node->label;
  return out;
}

class PrefixSearch {
 public:
  PrefixSearch(const CharLm *lm, const DecodeConfig &config, const Charset &charset)
      : lm_(lm), config_(config), charset_(charset) {}

  std::shared_ptr<PrefixNode> Child(const std::shared_ptr<PrefixNode> &node, int label) {
    auto &slot = node->children[label];
    if (auto alive = slot.lock()) return alive;
    auto child = std::make_shared<PrefixNode>();
    child->label = label;
    child->depth = node->depth + 1;
    child->parent = node;
    const char32_t key = charset_.key(static_cast<std::size_t>(label));
    if (key == config_.backspace) {
      child->text = node->text ? node->text->parent : nullptr;
    } else {
      auto t = std::make_shared<TextNode>();
      t->symbol = lm_ ? lm_->Find(key).value_or(-1) : -1;
      t->contribution = t->symbol >= 0 ? ScoreNext(node->text.get(), t->symbol) : 0.0;
      t->total = node->lm_total() + t->contribution;
      t->parent = node->text;
      child->text = std::move(t);
    }
    slot = child;
    return child;
  }

  // Natural-log LM score of `next` after `text`.
  double ScoreNext(const TextNode *text, SymbolId next) const {
    std::vector<SymbolId> ctx;
    const std::size_t want = static_cast<std::size_t>(std::max(lm_->order() - 1, 0));
    const TextNode *n = text;
    for (; n && ctx.size() < want; n = n->parent.get()) ctx.push_back(n->symbol);
    // Reached the start of the text: the history begins with <s>.
    if (n == nullptr && ctx.size() < want && lm_->bos() >= 0) ctx.push_back(lm_->bos());
    std::reverse(ctx.begin(), ctx.end());
    return lm_->ScoreIds(ctx, next) * std::numbers::ln10;
  }

  double Closing(const PrefixNode *node) const {
    if (!lm_ || lm_->eos() < 0) return 0.0;
    return ScoreNext(node->text.get(), lm_->eos());
  }

 private:
  const CharLm *lm_;
  const DecodeConfig &config_;
  const Charset &charset_;
};

struct Hyp {
  std::shared_ptr<PrefixNode> node;
  double pb = kNegInf;
  double pnb = kNegInf;
  double score = 0.0;
};

}  // namespace

void DecodeConfig::Validate() const {
  if (beam_size < 1) ThrowUsage("beam_size must be >= 1");
  if (!std::isfinite(lm_weight) || !std::isfinite(insertion_bonus))
    ThrowUsage("lm_weight and insertion_bonus must be finite");
}

Tensor LogSoftmaxRows(const Tensor &logits) {
  if (logits.rank() != 2) ThrowUsage("logits must be [T x V]");
  Tensor out = logits;
  const std::size_t V = logits.dim(1);
  for (std::size_t t = 0; t < logits.dim(0); ++t) {
    auto row = out.row(t);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    const double lse = m + std::log(sum);
    for (std::size_t v = 0; v < V; ++v) row[v] -= lse;
  }
  return out;
}

std::vector<int> GreedyLabels(const Tensor &logits, std::size_t blank_index) {
  if (logits.rank() != 2 || logits.dim(1) < 2) ThrowUsage("logits must be [T x V] with V >= 2");
  if (blank_index >= logits.dim(1)) ThrowUsage("blank index out of range");
  std::vector<int> labels;
  int prev = -1;
  for (std::size_t t = 0; t < logits.dim(0); ++t) {
    const auto row = logits.row(t);
    const int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best != prev && best != static_cast<int>(blank_index)) labels.push_back(best);
    prev = best;
  }
  return labels;
}

Keystrokes GreedyDecode(const Tensor &logits, const Charset &charset) {
  if (logits.rank() != 2 || logits.dim(1) != charset.size())
    ThrowUsage("logit width does not match the charset");
  return charset.LabelsToKeys(GreedyLabels(logits, charset.blank_index()));
}

std::vector<BeamResult> BeamSearchNBest(const Tensor &logits, const CharLm *lm,
                                        const DecodeConfig &config, const Charset &charset) {
  config.Validate();
  if (logits.rank() != 2 || logits.dim(1) != charset.size())
    ThrowUsage("logit width does not match the charset");
  if (config.blank_index != charset.blank_index())
    ThrowUsage("decode blank index does not match the charset");
  if (!logits.AllFinite()) ThrowNumeric("logits contain non-finite values");

  const Tensor logp = LogSoftmaxRows(logits);
  const std::size_t T = logits.dim(0), V = logits.dim(1);
  const int blank = static_cast<int>(config.blank_index);
  const double lambda = lm ? config.lm_weight : 0.0;
  PrefixSearch search(lm, config, charset);

  auto rank = [&](std::vector<Hyp> &hyps, auto extra) {
    for (Hyp &h : hyps)
      h.score = LogAdd(h.pb, h.pnb) + lambda * (h.node->lm_total() + extra(h)) +
                config.insertion_bonus * static_cast<double>(h.node->depth);
    std::sort(hyps.begin(), hyps.end(), [](const Hyp &a, const Hyp &b) {
      if (a.score != b.score) return a.score > b.score;
      return Labels(a.node.get()) < Labels(b.node.get());
    });
  };
  auto no_extra = [](const Hyp &) { return 0.0; };

  std::vector<Hyp> beam{{std::make_shared<PrefixNode>(), 0.0, kNegInf, 0.0}};
  std::vector<int> order(V);
  std::iota(order.begin(), order.end(), 0);
  order.erase(order.begin() + blank);

  for (std::size_t t = 0; t < T; ++t) {
    const auto lp = logp.row(t);
    std::vector<int> candidates = order;
    if (config.extension_top_k > 0 && config.extension_top_k < candidates.size()) {
      std::partial_sort(candidates.begin(), candidates.begin() + config.extension_top_k,
                        candidates.end(), [&](int a, int b) {
                          return lp[a] != lp[b] ? lp[a] > lp[b] : a < b;
                        });
      candidates.resize(config.extension_top_k);
    }

    std::unordered_map<PrefixNode *, Hyp> next;
    auto slot = [&](const std::shared_ptr<PrefixNode> &node) -> Hyp & {
      auto [it, inserted] = next.try_emplace(node.get());
      if (inserted) it->second.node = node;
      return it->second;
    };
    for (const Hyp &h : beam) {
      const double total = LogAdd(h.pb, h.pnb);
      Hyp &same = slot(h.node);
      same.pb = LogAdd(same.pb, total + lp[blank]);
      for (int c : candidates) {
        if (c == h.node->label) {
          same.pnb = LogAdd(same.pnb, h.pnb + lp[c]);
          if (h.pb != kNegInf) {
            Hyp &ext = slot(search.Child(h.node, c));
            ext.pnb = LogAdd(ext.pnb, h.pb + lp[c]);
          }
        } else {
          Hyp &ext = slot(search.Child(h.node, c));
          ext.pnb = LogAdd(ext.pnb, total + lp[c]);
        }
      }
    }
    beam.clear();
    beam.reserve(next.size());
    for (auto &kv : next) beam.push_back(std::move(kv.second));
    rank(beam, no_extra);
    if (beam.size() > config.beam_size) beam.resize(config.beam_size);
  }

  rank(beam, [&](const Hyp &h) { return search.Closing(h.node.get()); });
  std::vector<BeamResult> results;
  for (const Hyp &h : beam) {
    BeamResult r;
    r.labels = Labels(h.node.get());
    r.keys = charset.LabelsToKeys(r.labels);
    r.acoustic = LogAdd(h.pb, h.pnb);
    r.lm = lm ? h.node->lm_total() + search.Closing(h.node.get()) : 0.0;
    r.score = h.score;
    results.push_back(std::move(r));
  }
  return results;
}

Keystrokes BeamSearch(const Tensor &logits, const CharLm *lm, const DecodeConfig &config,
                      const Charset &charset) {
  return BeamSearchNBest(logits, lm, config, charset).front().keys;
}

}  // namespace emgtype
