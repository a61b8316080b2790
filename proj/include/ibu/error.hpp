// Copyright 2026 The IBU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IBU_ERROR_HPP_
#define IBU_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ibu {

enum class ErrorCode {
  kInvalidInput,
  kDimensionMismatch,
  kDegenerateVector,
  kInvalidStart,
  kInfeasibleStart,
  kInfiniteLogLikelihood,
  kNotInvertible,
  kNotIdentifiable,
  kNoFeasibleMle,
  kCapacity,
  kUnsupported,
  kUnknownMechanism,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI, the experiment harness) can react without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDegenerateVector: return "degenerate-vector";
    case ErrorCode::kInvalidStart: return "invalid-start";
    case ErrorCode::kInfeasibleStart: return "infeasible-start";
    case ErrorCode::kInfiniteLogLikelihood: return "infinite-log-likelihood";
    case ErrorCode::kNotInvertible: return "not-invertible";
    case ErrorCode::kNotIdentifiable: return "non-identifiable";
    case ErrorCode::kNoFeasibleMle: return "no-feasible-mle";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kUnknownMechanism: return "unknown-mechanism";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace ibu

#endif  // IBU_ERROR_HPP_
