// Copyright 2026 The Groupfill Authors.
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groupfill {

enum class ErrorCode {
  kOverlappingGroups,
  kUncoveredAntenna,
  kNonPositiveBudget,
  kNonFiniteInput,
  kNegativeGain,
  kInvalidGroup,
  kEmptyProblem,
  kIndexOutOfRange,
  kDimensionMismatch,
  kLengthMismatch,
  kToleranceNotReached,
  kDomainError,
  kNonFiniteGradient,
  kProblemTooLarge,
  kSchemaError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOverlappingGroups: return "OverlappingGroups";
    case ErrorCode::kUncoveredAntenna: return "UncoveredAntenna";
    case ErrorCode::kNonPositiveBudget: return "NonPositiveBudget";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kNegativeGain: return "NegativeGain";
    case ErrorCode::kInvalidGroup: return "InvalidGroup";
    case ErrorCode::kEmptyProblem: return "EmptyProblem";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kToleranceNotReached: return "ToleranceNotReached";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::kSchemaError: return "SchemaError";
  }
  return "Unknown";
}

/// Base class for every error raised by the library. The code is stable and
/// is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when a bisection hits its iteration cap; carries the best residual.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved_residual)
      : Error(ErrorCode::kToleranceNotReached,
              what + " (achieved residual " +
                  std::to_string(achieved_residual) + ")"),
        residual_(achieved_residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace groupfill
