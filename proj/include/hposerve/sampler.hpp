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
#include <optional>
#include <vector>

#include "hposerve/random_sampling.hpp"
#include "hposerve/space.hpp"
#include "hposerve/study.hpp"

namespace hposerve {

struct Observation {
  Assignment params;
  double objective = 0.0;
};

/// Completed trials of a study, in completion order.
struct ObservationHistory {
  std::vector<Observation> entries;
  Direction direction = Direction::kMinimize;
};

struct GoodBadSplit {
  std::vector<Observation> good;
  std::vector<Observation> bad;
};

/// The best max(1, ceil(gamma * n)) entries go to `good` (ties: earlier
/// completion first), the rest to `bad`; both keep completion order.
/// Throws Error(kEmptyHistory) on an empty history.
GoodBadSplit split_good_bad(const ObservationHistory& history, double gamma);

std::size_t good_count(std::size_t n, double gamma);

/// Point number `n_taken` of the row-major lattice over parameters sorted by
/// name, or nullopt once the lattice is exhausted.
std::optional<Assignment> grid_next(const SearchSpace& space,
                                    std::int64_t n_taken,
                                    const std::map<std::string, int>& points);

std::uint64_t grid_size(const SearchSpace& space,
                        const std::map<std::string, int>& points);

/// Next parameter set for a study.
///
/// random, or tpe with fewer than n_startup_trials observations: an
/// independent uniform draw. tpe: densities l (good) and g (bad) per
/// parameter; n_candidates joint draws from l, returning the one maximizing
/// sum(ln l - ln g). grid: lattice point `n_taken`.
///
/// Deterministic in (space, history, config, n_taken, rng_seed). Throws
/// Error(kIncompatibleHistory) if an observation does not conform to the
/// space and Error(kGridExhausted) past the end of a grid.
Assignment suggest(const SearchSpace& space, const ObservationHistory& history,
                   const SamplerConfig& config, std::int64_t n_taken,
                   std::uint64_t rng_seed);

/// TPE step alone, for tests and the python module; requires a non-empty
/// history.
Assignment suggest_tpe(const SearchSpace& space,
                       const ObservationHistory& history, double gamma,
                       int n_candidates, Rng& rng);

}  // namespace hposerve
