/* minimt - a compact Marathi-English neural machine translation toolkit.
 * Copyright (C) 2026 minimt contributors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace minimt {

enum class ErrorKind {
  kIo,         // unreadable / unwritable files
  kFormat,     // malformed file contents (bad UTF-8, bad TSV, bad checkpoint)
  kAlignment,  // parallel files with mismatched line counts
  kConfig,     // invalid configuration values
  kInput,      // invalid runtime inputs (misaligned lists, bad ids)
  kShape,      // tensor shape mismatches
  kLength,     // sequence exceeds a position limit
  kNumeric,    // non-finite values where finite ones are required
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // Exit-code convention: user/input problems are 1, internal bugs are 2.
  int exit_code() const {
    return kind_ == ErrorKind::kInternal || kind_ == ErrorKind::kNumeric ? 2
                                                                         : 1;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace minimt
