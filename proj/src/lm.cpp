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

#include "emgtype/lm.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "emgtype/charset.hpp"
#include "emgtype/error.hpp"

namespace emgtype {

namespace {

constexpr int kMaxSupportedOrder = 6;

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitFields(const std::string &line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string f;
  while (is >> f) out.push_back(f);
  return out;
}

double ParseNumber(const std::string &text, const std::string &where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception &) {
    ThrowData(where + ": bad number '" + text + "'");
  }
}

}  // namespace

SymbolId CharLm::Intern(const std::string &token, const std::string &where) {
  std::u32string cps;
  if (token == "<space>") {
    cps = U" ";
  } else {
    cps = FromUtf8(token);
    const bool sentinel = token == "<s>" || token == "</s>" || token == "<unk>";
    if (!sentinel && cps.size() != 1)
      ThrowData(where + ": token '" + token + "' is not a single character");
  }
  auto it = symbol_ids_.find(cps);
  if (it != symbol_ids_.end()) return it->second;
  const SymbolId id = static_cast<SymbolId>(symbols_.size());
  symbols_.push_back(cps);
  symbol_ids_.emplace(cps, id);
  if (token == "<s>") {
    bos_ = id;
  } else if (token == "</s>") {
    eos_ = id;
  } else if (token == "<unk>") {
    unk_ = id;
  } else {
    char_ids_.emplace(cps[0], id);
  }
  return id;
}

std::string CharLm::TokenText(SymbolId id) const {
  if (id == bos_) return "<s>";
  if (id == eos_) return "</s>";
  if (unk_ && id == *unk_) return "<unk>";
  const std::u32string &s = symbols_.at(id);
  if (s == U" ") return "<space>";
  return ToUtf8(s);
}

CharLm CharLm::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowData("cannot open language model '" + path + "'");
  return Parse(in, path);
}

CharLm CharLm::Parse(std::istream &in, const std::string &source) {
  CharLm lm;
  std::string line;
  int lineno = 0;
  auto where = [&]() { return source + ":" + std::to_string(lineno); };

  // Header.
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty()) continue;
    if (line == "\\data\\") {
      seen_data = true;
      break;
    }
    ThrowData(where() + ": expected \\data\\ header");
  }
  if (!seen_data) ThrowData(source + ": missing \\data\\ header");

  std::map<int, std::size_t> declared;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty()) {
      if (!declared.empty()) break;
      continue;
    }
    if (line.rfind("ngram ", 0) != 0) {
      if (line.front() == '\\') break;
      ThrowData(where() + ": malformed count line '" + line + "'");
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ThrowData(where() + ": malformed count line '" + line + "'");
    const int k = static_cast<int>(ParseNumber(Trim(line.substr(6, eq - 6)), where()));
    const double n = ParseNumber(Trim(line.substr(eq + 1)), where());
    if (k < 1 || n < 0 || declared.count(k)) ThrowData(where() + ": bad count line '" + line + "'");
    if (k != static_cast<int>(declared.size()) + 1)
      ThrowData(where() + ": n-gram orders must be listed 1, 2, ...");
    declared[k] = static_cast<std::size_t>(n);
  }
  if (declared.empty()) ThrowData(source + ": no n-gram counts in header");
  lm.order_ = static_cast<int>(declared.size());
  if (lm.order_ > kMaxSupportedOrder) {
    lm.warnings_.push_back("order " + std::to_string(lm.order_) + " exceeds " +
                           std::to_string(kMaxSupportedOrder));
  }
  lm.by_order_.resize(lm.order_);

  // Sections. `line` may already hold the first section header.
  int current = 0;
  auto close_section = [&]() {
    if (current == 0) return;
    const std::size_t found = lm.by_order_[current - 1].size();
    if (found != declared[current]) {
      ThrowData(source + ": section \\" + std::to_string(current) + "-grams: header declares " +
                std::to_string(declared[current]) + " entries, found " + std::to_string(found));
    }
  };
  bool ended = false;
  do {
    line = Trim(line);
    if (line.empty()) continue;
    if (line == "\\end\\") {
      close_section();
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      close_section();
      int k = 0;
      if (std::sscanf(line.c_str(), "\\%d-grams:", &k) != 1 || k != current + 1 ||
          k > lm.order_) {
        ThrowData(where() + ": unexpected section header '" + line + "'");
      }
      current = k;
      continue;
    }
    if (current == 0) ThrowData(where() + ": n-gram entry outside a section");
    const auto fields = SplitFields(line);
    const std::size_t k = static_cast<std::size_t>(current);
    if (fields.size() != k + 1 && fields.size() != k + 2)
      ThrowData(where() + ": expected " + std::to_string(k + 1) + " or " + std::to_string(k + 2) +
                " fields in \\" + std::to_string(k) + "-grams: entry");
    Stored s;
    s.entry.logprob = ParseNumber(fields[0], where());
    for (std::size_t i = 0; i < k; ++i) {
      const std::string &tok = fields[1 + i];
      SymbolId id;
      if (k == 1) {
        id = lm.Intern(tok, where());
      } else {
        std::u32string cps = tok == "<space>" ? std::u32string(U" ") : FromUtf8(tok);
        auto it = lm.symbol_ids_.find(cps);
        if (it == lm.symbol_ids_.end())
          ThrowData(where() + ": token '" + tok + "' has no unigram entry");
        id = it->second;
      }
      s.ids += static_cast<char32_t>(id);
    }
    if (fields.size() == k + 2) {
      s.entry.backoff = ParseNumber(fields[k + 1], where());
      s.has_backoff = true;
    }
    if (!std::isfinite(s.entry.backoff) || std::isnan(s.entry.logprob))
      ThrowData(where() + ": non-finite value");
    if (!lm.table_.emplace(s.ids, s.entry).second) ThrowData(where() + ": duplicate n-gram");
    lm.by_order_[k - 1].push_back(std::move(s));
  } while (std::getline(in, line) && (++lineno, true));
  if (!ended) ThrowData(source + ": missing \\end\\ marker");
  for (int k = 1; k <= lm.order_; ++k) {
    if (!declared.count(k)) continue;
    if (k > current) ThrowData(source + ": section \\" + std::to_string(k) + "-grams: missing");
  }

  // Every explicit context must itself be an entry for its back-off weight.
  for (int k = 2; k <= lm.order_; ++k) {
    for (const Stored &s : lm.by_order_[k - 1]) {
      if (!lm.table_.count(s.ids.substr(0, s.ids.size() - 1))) {
        lm.warnings_.push_back("context of a " + std::to_string(k) +
                               "-gram has no entry; its back-off weight is taken as 0");
        break;
      }
    }
  }
  if (lm.MaxContextMass() > 1.0 + 1e-3)
    ThrowData(source + ": explicit continuations of some context sum to more than 1");
  return lm;
}

void CharLm::Write(std::ostream &out) const {
  out << "\\data\\\n";
  for (int k = 1; k <= order_; ++k)
    out << "ngram " << k << "=" << by_order_[k - 1].size() << "\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int k = 1; k <= order_; ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const Stored &s : by_order_[k - 1]) {
      out << s.entry.logprob << '\t';
      for (std::size_t i = 0; i < s.ids.size(); ++i) {
        if (i) out << ' ';
        out << TokenText(static_cast<SymbolId>(s.ids[i]));
      }
      if (s.has_backoff) out << '\t' << s.entry.backoff;
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

std::vector<std::size_t> CharLm::counts() const {
  std::vector<std::size_t> c;
  for (const auto &v : by_order_) c.push_back(v.size());
  return c;
}

std::optional<SymbolId> CharLm::Find(char32_t c) const {
  auto it = char_ids_.find(c);
  if (it != char_ids_.end()) return it->second;
  return unk_;
}

SymbolId CharLm::Lookup(char32_t c) const {
  auto id = Find(c);
  if (!id) ThrowData("unscorable symbol");
  return *id;
}

const CharLm::Entry *CharLm::Get(std::u32string_view ids) const {
  auto it = table_.find(std::u32string(ids));
  return it == table_.end() ? nullptr : &it->second;
}

double CharLm::ScoreIds(std::span<const SymbolId> context, SymbolId next) const {
  if (next < 0 || static_cast<std::size_t>(next) >= symbols_.size())
    ThrowData("unscorable symbol");
  const std::size_t keep = std::min<std::size_t>(context.size(), order_ - 1);
  std::u32string hist;
  for (std::size_t i = context.size() - keep; i < context.size(); ++i)
    hist += static_cast<char32_t>(context[i]);
  double backoff = 0.0;
  while (true) {
    std::u32string key = hist;
    key += static_cast<char32_t>(next);
    if (const Entry *e = Get(key)) return backoff + e->logprob;
    if (hist.empty()) ThrowData("unscorable symbol");
    if (const Entry *h = Get(hist)) backoff += h->backoff;
    hist.erase(0, 1);
  }
}

double CharLm::Score(std::u32string_view context, char32_t next) const {
  std::vector<SymbolId> ctx;
  for (char32_t c : context) ctx.push_back(Find(c).value_or(-1));
  return ScoreIds(ctx, Lookup(next));
}

double CharLm::MaxContextMass() const {
  std::unordered_map<std::u32string, double> mass;
  for (const auto &section : by_order_)
    for (const Stored &s : section) {
      if (s.ids.size() == 1 && static_cast<SymbolId>(s.ids[0]) == bos_) continue;
      mass[s.ids.substr(0, s.ids.size() - 1)] += std::pow(10.0, s.entry.logprob);
    }
  double worst = 0.0;
  for (const auto &kv : mass) worst = std::max(worst, kv.second);
  return worst;
}

}  // namespace emgtype
