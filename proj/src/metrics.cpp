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

#include "emgtype/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "emgtype/decode.hpp"
#include "emgtype/error.hpp"

namespace emgtype {

CerBreakdown ComputeCer(std::u32string_view ref, std::u32string_view hyp) {
  if (ref.empty()) ThrowData("undefined CER");
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]), at(i, j - 1) + 1,
                           at(i - 1, j) + 1});

  CerBreakdown out;
  out.reference_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1])) {
      out.substitutions += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (j > 0 && at(i, j) == at(i, j - 1) + 1) {
      ++out.insertions;
      --j;
    } else {
      ++out.deletions;
      --i;
    }
  }
  out.cer = 100.0 * static_cast<double>(out.edits()) / static_cast<double>(n);
  return out;
}

CtcLikelihood CtcLogLikelihood(const Tensor &logits, std::span<const int> target,
                               std::size_t blank_index) {
  if (logits.rank() != 2 || logits.dim(0) == 0) ThrowUsage("logits must be [T x V], T >= 1");
  const std::size_t T = logits.dim(0), V = logits.dim(1);
  if (blank_index >= V) ThrowUsage("blank index out of range");
  for (int l : target)
    if (l < 0 || static_cast<std::size_t>(l) >= V || static_cast<std::size_t>(l) == blank_index)
      ThrowUsage("target label out of range");

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::size_t repeats = 0;
  for (std::size_t k = 1; k < target.size(); ++k) repeats += target[k] == target[k - 1];
  if (target.size() + repeats > T) return {kNegInf, false};

  const Tensor lp = LogSoftmaxRows(logits);
  const std::size_t S = 2 * target.size() + 1;
  auto label = [&](std::size_t s) {
    return s % 2 == 0 ? static_cast<int>(blank_index) : target[s / 2];
  };
  auto add = [](double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
  };
  std::vector<double> alpha(S, kNegInf), next(S);
  alpha[0] = lp.at({0, blank_index});
  if (S > 1) alpha[1] = lp.at({0, static_cast<std::size_t>(target[0])});
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[s];
      if (s >= 1) a = add(a, alpha[s - 1]);
      if (s >= 2 && label(s) != static_cast<int>(blank_index) && label(s) != label(s - 2))
        a = add(a, alpha[s - 2]);
      next[s] = a + lp.at({t, static_cast<std::size_t>(label(s))});
    }
    alpha.swap(next);
  }
  const double ll = S > 1 ? add(alpha[S - 1], alpha[S - 2]) : alpha[0];
  return {ll, true};
}

}  // namespace emgtype
