// Copyright 2026 The fadx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FADX_ERROR_HPP_
#define FADX_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace fadx {

// Every error raised by the library derives from Error. The CLI maps
// NumericDivergenceError to exit status 3 and everything else to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input that is structurally valid but carries no information to evaluate
// (empty class subset, every token masked, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// N-AUC is undefined when the bounded curve area is zero.
class ExcludedCaseError : public Error {
 public:
  using Error::Error;
};

// Input file could not be parsed. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NumericDivergenceError : public Error {
 public:
  NumericDivergenceError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace fadx

#endif  // FADX_ERROR_HPP_
