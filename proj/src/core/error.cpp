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
#include "hposerve/error.hpp"

namespace hposerve {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kValidation: return "validation_failed";
    case Errc::kIncompatibleHistory: return "incompatible_history";
    case Errc::kEmptyHistory: return "empty_history";
    case Errc::kValueOutOfRange: return "value_out_of_range";
    case Errc::kNonFiniteValue: return "non_finite_value";
    case Errc::kUnknownStudy: return "unknown_study";
    case Errc::kUnknownTrial: return "unknown_trial";
    case Errc::kUnknownToken: return "unknown_token";
    case Errc::kParamsMismatch: return "params_mismatch";
    case Errc::kIllegalTransition: return "illegal_transition";
    case Errc::kTrialNotRunning: return "trial_not_running";
    case Errc::kNonMonotonicStep: return "non_monotonic_step";
    case Errc::kGridExhausted: return "grid_exhausted";
    case Errc::kStorageUnavailable: return "storage_unavailable";
  }
  return "unknown";
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
  std::string out = "invalid study definition";
  for (const auto& v : violations) {
    out += "; ";
    out += v.code;
    if (!v.param.empty()) out += "(" + v.param + ")";
    if (!v.message.empty()) out += ": " + v.message;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(Errc::kValidation, summarize(violations)),
      violations_(std::move(violations)) {}

}  // namespace hposerve
