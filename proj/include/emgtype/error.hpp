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

#ifndef EMGTYPE_ERROR_HPP_
#define EMGTYPE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace emgtype {

// Broad failure classes. They map one-to-one onto the C API status codes
// and the CLI exit codes.
enum class ErrorKind {
  kUsage = 1,    // bad arguments or configuration
  kData = 2,     // malformed or inconsistent input data
  kNumeric = 3,  // non-finite values or numerically infeasible requests
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowUsage(const std::string &msg) {
  throw Error(ErrorKind::kUsage, msg);
}
[[noreturn]] inline void ThrowData(const std::string &msg) {
  throw Error(ErrorKind::kData, msg);
}
[[noreturn]] inline void ThrowNumeric(const std::string &msg) {
  throw Error(ErrorKind::kNumeric, msg);
}

}  // namespace emgtype

#endif  // EMGTYPE_ERROR_HPP_
