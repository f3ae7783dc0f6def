// Copyright 2026 The lags Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lags {

// Shapes or dimensions that do not line up (layer counts, per-worker sizes).
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Out-of-domain scalar arguments (k out of range, non-positive step, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values produced during evaluation or training.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  explicit NumericError(const std::string& what)
      : NumericError(what, static_cast<std::size_t>(-1)) {}

  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// Malformed text input; line is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A stored artifact is missing, truncated or does not match its recorded digest.
class IntegrityError : public std::runtime_error {
 public:
  IntegrityError(const std::string& file, const std::string& what)
      : std::runtime_error(file + ": " + what), file_(file) {}

  const std::string& file() const { return file_; }

 private:
  std::string file_;
};

}  // namespace lags
