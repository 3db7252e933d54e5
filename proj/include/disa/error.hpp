// Copyright 2026 The Disa Authors. All Rights Reserved.
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


#ifndef DISA_ERROR_HPP
#define DISA_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace disa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimension or shape disagreement between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinity where a finite value is required.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed textual input. `offset` is a byte offset within the parsed
/// string, `line` a 1-based line number in a file (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t line = 0)
      : Error(what), offset_(offset), line_(line) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t offset_;
  std::size_t line_;
};

/// A token, character or key that a lookup does not know.
class UnknownTokenError : public Error {
 public:
  using Error::Error;
};

/// A value outside its permitted range (labels, tones, sizes).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// File-system failures.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Inputs that are individually valid but cannot be used together
/// (empty intersections, missing tones, empty batches).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace disa

#endif  // DISA_ERROR_HPP
