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
#include <string>
#include <string_view>
#include <vector>

#include "hposerve/random_sampling.hpp"
#include "hposerve/space.hpp"

namespace hposerve::bench {

enum class ObjectiveKind { kSphere, kBranin, kNoisyRosenbrock };

/// Analytic stand-in for a training job. `evaluate` is the final loss (always
/// minimized); `curve` simulates the per-step loss of a run that converges to
/// that final value.
class BenchObjective {
 public:
  static constexpr double kBraninMinimum = 0.397887357729739;

  explicit BenchObjective(ObjectiveKind kind);
  static std::optional<BenchObjective> by_name(std::string_view name);

  ObjectiveKind kind() const { return kind_; }
  std::string_view name() const;
  const SearchSpace& space() const { return space_; }

  /// Deterministic given the rng state; only noisy_rosenbrock draws from it.
  double evaluate(const Assignment& params, Rng& rng) const;

  /// final + amplitude * exp(-step / tau(params)) + N(0, 0.01 * amplitude)
  double curve(const Assignment& params, double final_value,
               std::int64_t step, Rng& rng) const;

  double amplitude() const;
  double time_constant(const Assignment& params) const;

 private:
  ObjectiveKind kind_;
  SearchSpace space_;
};

double sphere(double x0, double x1);
double branin(double x, double y);
double rosenbrock(double x, double y);

/// Best objective of `n_trials` independent uniform draws over the
/// objective's space. +inf for n_trials == 0. Runs entirely in process and
/// shares no sampling code with the server.
double oracle_random_search(const BenchObjective& objective,
                            std::int64_t n_trials, std::uint64_t seed);

}  // namespace hposerve::bench
