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

#ifndef EMGTYPE_METRICS_HPP_
#define EMGTYPE_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string_view>

#include "emgtype/tensor.hpp"

namespace emgtype {

struct CerBreakdown {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;
  double cer = 0.0;  // percent

  std::size_t edits() const { return substitutions + deletions + insertions; }
};

// Character error rate over keystrokes, backspaces included. The split into
// S/D/I follows a backtrace that prefers the diagonal (match or
// substitution), then insertion, then deletion.
CerBreakdown ComputeCer(std::u32string_view reference, std::u32string_view hypothesis);

struct CtcLikelihood {
  double log_likelihood = 0.0;  // natural log
  bool feasible = true;         // false when the target cannot fit in T frames
};

// log P(target | logits) by the CTC forward algorithm over the
// blank-interleaved target. Logits are log-softmaxed per frame first.
CtcLikelihood CtcLogLikelihood(const Tensor &logits, std::span<const int> target,
                               std::size_t blank_index);

}  // namespace emgtype

#endif  // EMGTYPE_METRICS_HPP_
