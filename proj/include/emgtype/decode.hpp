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

#ifndef EMGTYPE_DECODE_HPP_
#define EMGTYPE_DECODE_HPP_

#include <cstddef>
#include <vector>

#include "emgtype/charset.hpp"
#include "emgtype/lm.hpp"
#include "emgtype/tensor.hpp"

namespace emgtype {

struct DecodeConfig {
  std::size_t beam_size = 50;
  double lm_weight = 1.5;        // lambda, applied to natural-log LM scores
  double insertion_bonus = 0.5;  // beta, per emitted keystroke
  std::size_t blank_index = 99;
  char32_t backspace = kBackspace;
  // Characters tried per hypothesis and frame, best first; 0 tries all.
  std::size_t extension_top_k = 0;

  void Validate() const;
};

// Per-frame argmax, repeats collapsed, blanks dropped. Backspace is an
// ordinary label here.
std::vector<int> GreedyLabels(const Tensor &logits, std::size_t blank_index);
Keystrokes GreedyDecode(const Tensor &logits, const Charset &charset);

// Row-wise log-softmax of [T x V] logits.
Tensor LogSoftmaxRows(const Tensor &logits);

struct BeamResult {
  std::vector<int> labels;
  Keystrokes keys;
  double acoustic = 0.0;  // log(p_blank + p_nonblank), natural log
  double lm = 0.0;        // surviving LM contributions plus sentence end, natural log
  double score = 0.0;     // acoustic + lm_weight * lm + insertion_bonus * |labels|
};

// Backspace-aware CTC prefix beam search.
//
// Each hypothesis carries the edited text the LM sees and a ledger of the
// LM contribution of every surviving character. Extending with a regular
// key scores it against the edited text and pushes the score; extending
// with backspace pops the newest entry (a no-op on empty text) and drops
// that character from the LM context. The backspace keystroke itself stays
// in the output. After the last frame every hypothesis receives the
// sentence-end score. Hypotheses are ranked by score, ties by label
// sequence, and the beam keeps the best `beam_size` after every frame.
//
// `lm` may be null, in which case all LM terms are zero. Results come
// back best first.
std::vector<BeamResult> BeamSearchNBest(const Tensor &logits, const CharLm *lm,
                                        const DecodeConfig &config, const Charset &charset);

Keystrokes BeamSearch(const Tensor &logits, const CharLm *lm, const DecodeConfig &config,
                      const Charset &charset);

}  // namespace emgtype

#endif  // EMGTYPE_DECODE_HPP_
