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

#ifndef EMGTYPE_LM_HPP_
#define EMGTYPE_LM_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emgtype {

using SymbolId = int;

// Character n-gram language model with back-off, read from the usual
// text format ("\data\" header, "\k-grams:" sections, log10 values).
//
// Tokens are single characters. "<s>", "</s>" and "<unk>" are the usual
// sentinels and "<space>" stands for ' '.
class CharLm {
 public:
  static CharLm Load(const std::string &path);
  static CharLm Parse(std::istream &in, const std::string &source = "<stream>");
  void Write(std::ostream &out) const;

  int order() const { return order_; }
  std::size_t num_symbols() const { return symbols_.size(); }
  // Entries per order, 1-based (counts()[0] is unigrams).
  std::vector<std::size_t> counts() const;
  const std::vector<std::string> &warnings() const { return warnings_; }

  SymbolId bos() const { return bos_; }
  SymbolId eos() const { return eos_; }
  std::optional<SymbolId> unk() const { return unk_; }

  // Symbol for a character; falls back to <unk>. Empty if neither exists.
  std::optional<SymbolId> Find(char32_t c) const;
  // Like Find but throws "unscorable symbol".
  SymbolId Lookup(char32_t c) const;

  // log10 P(next | context). Only the last order-1 context symbols matter;
  // unmatched histories accumulate their back-off weights.
  double ScoreIds(std::span<const SymbolId> context, SymbolId next) const;
  // Character convenience form; `context` carries no sentence-start marker.
  double Score(std::u32string_view context, char32_t next) const;

  // Largest total probability over explicit continuations of one context.
  double MaxContextMass() const;

 private:
  struct Entry {
    double logprob = 0.0;
    double backoff = 0.0;
  };
  struct Stored {
    std::u32string ids;
    Entry entry;
    bool has_backoff = false;
  };

  SymbolId Intern(const std::string &token, const std::string &where);
  std::string TokenText(SymbolId id) const;
  const Entry *Get(std::u32string_view ids) const;

  int order_ = 0;
  std::vector<std::u32string> symbols_;  // id -> token (code points)
  std::unordered_map<std::u32string, SymbolId> symbol_ids_;
  std::unordered_map<char32_t, SymbolId> char_ids_;
  SymbolId bos_ = -1, eos_ = -1;
  std::optional<SymbolId> unk_;
  std::vector<std::vector<Stored>> by_order_;
  std::unordered_map<std::u32string, Entry> table_;
  std::vector<std::string> warnings_;
};

}  // namespace emgtype

#endif  // EMGTYPE_LM_HPP_
