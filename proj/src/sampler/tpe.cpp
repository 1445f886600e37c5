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
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hposerve/parzen.hpp"
#include "hposerve/sampler.hpp"

namespace hposerve {

std::size_t good_count(std::size_t n, double gamma) {
  // The epsilon keeps e.g. 0.1 * 30 from rounding up to 4.
  const double raw = std::ceil(gamma * static_cast<double>(n) - 1e-9);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, n);
}

GoodBadSplit split_good_bad(const ObservationHistory& history, double gamma) {
  const auto& entries = history.entries;
  if (entries.empty()) {
    throw Error(Errc::kEmptyHistory, "cannot split an empty history");
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  const double sign = history.direction == Direction::kMinimize ? 1.0 : -1.0;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return sign * entries[a].objective <
                            sign * entries[b].objective;
                   });
  const std::size_t k = good_count(entries.size(), gamma);
  std::vector<bool> is_good(entries.size(), false);
  for (std::size_t i = 0; i < k; ++i) is_good[order[i]] = true;

  GoodBadSplit split;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    (is_good[i] ? split.good : split.bad).push_back(entries[i]);
  }
  return split;
}

namespace {

std::vector<ParamValue> column(const std::vector<Observation>& entries,
                               const std::string& name) {
  std::vector<ParamValue> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.params.at(name));
  return out;
}

void check_history(const SearchSpace& space,
                   const ObservationHistory& history) {
  for (std::size_t i = 0; i < history.entries.size(); ++i) {
    const auto& e = history.entries[i];
    auto problems = assignment_mismatches(space, e.params);
    if (!problems.empty()) {
      throw Error(Errc::kIncompatibleHistory,
                  "observation " + std::to_string(i) + ": " + problems.front());
    }
    if (!std::isfinite(e.objective)) {
      throw Error(Errc::kIncompatibleHistory,
                  "observation " + std::to_string(i) + ": non-finite objective");
    }
  }
}

}  // namespace

Assignment suggest_tpe(const SearchSpace& space,
                       const ObservationHistory& history, double gamma,
                       int n_candidates, Rng& rng) {
  const auto split = split_good_bad(history, gamma);
  const auto specs = space.sorted();

  std::vector<ParzenDensity> good;
  std::vector<ParzenDensity> bad;
  good.reserve(specs.size());
  bad.reserve(specs.size());
  for (const auto& spec : specs) {
    good.push_back(fit_parzen(column(split.good, spec.name), spec));
    bad.push_back(fit_parzen(column(split.bad, spec.name), spec));
  }

  Assignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < std::max(1, n_candidates); ++c) {
    Assignment candidate;
    double score = 0.0;
    for (std::size_t p = 0; p < specs.size(); ++p) {
      auto value = good[p].sample(rng);
      score += good[p].log_pdf(value) - bad[p].log_pdf(value);
      candidate.emplace(specs[p].name, std::move(value));
    }
    if (best.empty() || score > best_score) {
      best_score = score;
      best = std::move(candidate);
    }
  }
  return best;
}

Assignment suggest(const SearchSpace& space, const ObservationHistory& history,
                   const SamplerConfig& config, std::int64_t n_taken,
                   std::uint64_t rng_seed) {
  check_history(space, history);
  Rng rng(rng_seed);
  switch (config.kind) {
    case SamplerKind::kGrid: {
      auto point = grid_next(space, n_taken, config.grid_points);
      if (!point) {
        throw Error(Errc::kGridExhausted,
                    "grid has no unvisited point left (" +
                        std::to_string(grid_size(space, config.grid_points)) +
                        " points)");
      }
      return *point;
    }
    case SamplerKind::kTpe:
      if (history.entries.size() >=
          static_cast<std::size_t>(std::max(1, config.n_startup_trials))) {
        return suggest_tpe(space, history, config.gamma, config.n_candidates,
                           rng);
      }
      [[fallthrough]];
    case SamplerKind::kRandom:
      break;
  }
  return sample_uniform_random(space, rng);
}

}  // namespace hposerve
