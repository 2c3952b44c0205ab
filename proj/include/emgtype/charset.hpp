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

#ifndef EMGTYPE_CHARSET_HPP_
#define EMGTYPE_CHARSET_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emgtype {

// Keystroke sequences are sequences of code points; special keys have
// their own symbols.
using Keystrokes = std::u32string;

inline constexpr char32_t kBackspace = U'⌫';
inline constexpr char32_t kEnter = U'⏎';
inline constexpr char32_t kShift = U'⇧';
inline constexpr char32_t kTab = U'⇥';

std::string ToUtf8(std::u32string_view text);
std::u32string FromUtf8(std::string_view text);  // throws kData on bad input

// Maps CTC class indices to keystrokes. One class is the CTC blank.
class Charset {
 public:
  // `keys` in class order with the blank inserted at `blank_index`.
  Charset(std::vector<char32_t> keys, std::size_t blank_index);

  // 95 printable ASCII characters, backspace, enter, shift and tab, with
  // the blank last: 100 classes.
  static Charset Default();

  std::size_t size() const { return classes_.size(); }
  std::size_t blank_index() const { return blank_; }
  char32_t key(std::size_t cls) const;
  std::optional<std::size_t> index_of(char32_t key) const;

  Keystrokes LabelsToKeys(std::span<const int> labels) const;
  std::vector<int> KeysToLabels(std::u32string_view keys) const;

 private:
  std::vector<char32_t> classes_;  // blank slot holds 0
  std::size_t blank_;
  std::unordered_map<char32_t, std::size_t> index_;
};

}  // namespace emgtype

#endif  // EMGTYPE_CHARSET_HPP_
