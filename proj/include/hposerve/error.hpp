// Copyright 2026 The hposerve Authors
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
#include <vector>

namespace hposerve {

enum class Errc {
  kValidation,
  kIncompatibleHistory,
  kEmptyHistory,
  kValueOutOfRange,
  kNonFiniteValue,
  kUnknownStudy,
  kUnknownTrial,
  kUnknownToken,
  kParamsMismatch,
  kIllegalTransition,
  kTrialNotRunning,
  kNonMonotonicStep,
  kGridExhausted,
  kStorageUnavailable,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// One problem found while validating a study definition. `code` is a short
/// machine name such as "BadBounds"; `param` names the offending parameter or
/// field path and may be empty.
struct Violation {
  std::string code;
  std::string param;
  std::string message;

  bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<Violation> violations_;
};

}  // namespace hposerve
