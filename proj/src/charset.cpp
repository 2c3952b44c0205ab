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

#include "emgtype/charset.hpp"

#include "emgtype/error.hpp"

namespace emgtype {

std::string ToUtf8(std::u32string_view text) {
  std::string out;
  for (char32_t c : text) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

std::u32string FromUtf8(std::string_view text) {
  std::u32string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    int extra = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      ThrowData("invalid UTF-8 lead byte");
    }
    if (i + extra >= text.size())
      ThrowData("truncated UTF-8 sequence");
    for (int k = 1; k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) ThrowData("invalid UTF-8 continuation byte");
      cp = (cp << 6) | (b & 0x3F);
    }
    out += cp;
    i += 1 + extra;
  }
  return out;
}

Charset::Charset(std::vector<char32_t> keys, std::size_t blank_index) : blank_(blank_index) {
  if (blank_index > keys.size()) ThrowUsage("blank index past the end of the charset");
  classes_ = std::move(keys);
  classes_.insert(classes_.begin() + static_cast<std::ptrdiff_t>(blank_index), char32_t{0});
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (i == blank_) continue;
    if (!index_.emplace(classes_[i], i).second) ThrowUsage("duplicate key in charset");
  }
}

Charset Charset::Default() {
  std::vector<char32_t> keys;
  for (char32_t c = 0x20; c <= 0x7E; ++c) keys.push_back(c);
  keys.insert(keys.end(), {kBackspace, kEnter, kShift, kTab});
  const std::size_t n = keys.size();
  return Charset(std::move(keys), n);
}

char32_t Charset::key(std::size_t cls) const {
  if (cls >= classes_.size() || cls == blank_) ThrowUsage("class index has no key");
  return classes_[cls];
}

std::optional<std::size_t> Charset::index_of(char32_t key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Keystrokes Charset::LabelsToKeys(std::span<const int> labels) const {
  Keystrokes out;
  for (int l : labels) out += key(static_cast<std::size_t>(l));
  return out;
}

std::vector<int> Charset::KeysToLabels(std::u32string_view keys) const {
  std::vector<int> labels;
  for (char32_t k : keys) {
    auto idx = index_of(k);
    if (!idx) ThrowData("key U+" + std::to_string(static_cast<unsigned>(k)) + " not in charset");
    labels.push_back(static_cast<int>(*idx));
  }
  return labels;
}

}  // namespace emgtype
