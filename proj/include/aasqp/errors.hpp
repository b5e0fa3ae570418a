/*
 Copyright 2026 The aasqp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace aasqp {

enum class ErrorCode {
  NotPositiveDefinite,
  NotSymmetric,
  NoConvergence,
  DimensionMismatch,
  Infeasible,
  Degenerate,
  RankDeficientConstraints,
  MissingStructure,
  LinearizationFailure,
  DegenerateSecant,
  ActiveSetUnstable,
  InsufficientTail,
  Configuration,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::RankDeficientConstraints: return "RankDeficientConstraints";
    case ErrorCode::MissingStructure: return "MissingStructure";
    case ErrorCode::LinearizationFailure: return "LinearizationFailure";
    case ErrorCode::DegenerateSecant: return "DegenerateSecant";
    case ErrorCode::ActiveSetUnstable: return "ActiveSetUnstable";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::Configuration: return "Configuration";
  }
  return "Unknown";
}

/// Exception thrown by every module of the library. The code identifies the failure class so
/// callers can branch on it without parsing messages.
class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aasqp
