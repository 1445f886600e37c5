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
#include "hposerve/pruner.hpp"

#include <algorithm>
#include <cmath>

namespace hposerve {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

bool should_prune(double current_value, const StepSnapshot& snapshot,
                  Direction direction, const PrunerConfig& config) {
  if (!std::isfinite(current_value)) {
    throw Error(Errc::kNonFiniteValue, "intermediate value must be finite");
  }
  if (config.kind == PrunerKind::kNone) return false;
  if (snapshot.step < config.n_warmup_steps) return false;
  if (static_cast<std::int64_t>(snapshot.peer_values.size()) <
      config.n_min_trials) {
    return false;
  }
  // Ties with the median survive.
  return is_better(median(snapshot.peer_values), current_value, direction);
}

StepSnapshot collect_snapshot(std::span<const Trial> trials, std::int64_t step,
                              std::string_view self_trial_id) {
  StepSnapshot snapshot;
  snapshot.step = step;
  for (const auto& trial : trials) {
    if (trial.trial_id == self_trial_id) continue;
    const auto& iv = trial.intermediates;
    auto it = std::lower_bound(
        iv.begin(), iv.end(), step,
        [](const Intermediate& m, std::int64_t s) { return m.step < s; });
    if (it != iv.end() && it->step == step) {
      snapshot.peer_values.push_back(it->value);
    }
  }
  return snapshot;
}

}  // namespace hposerve
