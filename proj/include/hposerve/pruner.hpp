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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hposerve/study.hpp"

namespace hposerve {

/// Values other trials reported at exactly `step`.
struct StepSnapshot {
  std::int64_t step = 0;
  std::vector<double> peer_values;
};

/// Mean of the two central order statistics for even sizes.
double median(std::vector<double> values);

/// Median rule: prune iff past warmup, at least n_min_trials peers, and the
/// current value is strictly worse than the peer median.
/// Throws Error(kNonFiniteValue) for a non-finite current value.
bool should_prune(double current_value, const StepSnapshot& snapshot,
                  Direction direction, const PrunerConfig& config);

/// Every trial except `self_trial_id` (any state) that reported `step`
/// contributes its value there.
StepSnapshot collect_snapshot(std::span<const Trial> trials, std::int64_t step,
                              std::string_view self_trial_id = {});

}  // namespace hposerve
