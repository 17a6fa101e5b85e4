// Copyright 2026 The bipdetect Authors.
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

#ifndef BIPDETECT_ERRORS_H_
#define BIPDETECT_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bipdetect {

// Error categories. The CLI maps these onto exit codes.
enum class ErrorKind {
  kParameter,
  kDomain,
  kFormat,
  kBudget,
  kEmptyCondition,
  kConfiguration,
  kBracket,
  kIo,
};

const char* ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& message)
      : Error(ErrorKind::kParameter, message) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error(ErrorKind::kDomain, message) {}
};

// Malformed matrix file. `line()` is 1-based.
class FormatError : public Error {
 public:
  FormatError(int64_t line, const std::string& message)
      : Error(ErrorKind::kFormat,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int64_t line() const { return line_; }

 private:
  int64_t line_;
};

class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& message)
      : Error(ErrorKind::kBudget, message) {}
};

// Conditioning on an event of probability zero (k_min > n).
class EmptyConditionError : public Error {
 public:
  explicit EmptyConditionError(const std::string& message)
      : Error(ErrorKind::kEmptyCondition, message) {}
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& message)
      : Error(ErrorKind::kConfiguration, message) {}
};

class BracketError : public Error {
 public:
  explicit BracketError(const std::string& message)
      : Error(ErrorKind::kBracket, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message)
      : Error(ErrorKind::kIo, message) {}
};

}  // namespace bipdetect

#endif  // BIPDETECT_ERRORS_H_
