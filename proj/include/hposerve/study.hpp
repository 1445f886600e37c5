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

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hposerve/space.hpp"

namespace hposerve {

using TimePoint = std::chrono::system_clock::time_point;

enum class Direction { kMinimize, kMaximize };

std::string_view direction_name(Direction direction);
std::optional<Direction> parse_direction(std::string_view name);

/// True if `a` is strictly better than `b` under `direction`.
inline bool is_better(double a, double b, Direction direction) {
  return direction == Direction::kMinimize ? a < b : a > b;
}

enum class SamplerKind { kRandom, kTpe, kGrid };
std::string_view sampler_kind_name(SamplerKind kind);
std::optional<SamplerKind> parse_sampler_kind(std::string_view name);

struct SamplerConfig {
  static constexpr int kDefaultStartupTrials = 10;
  static constexpr double kDefaultGamma = 0.25;
  static constexpr int kDefaultCandidates = 24;

  SamplerKind kind = SamplerKind::kTpe;
  std::uint64_t seed = 0;
  int n_startup_trials = kDefaultStartupTrials;
  double gamma = kDefaultGamma;
  int n_candidates = kDefaultCandidates;
  // grid only: points per non-categorical parameter
  std::map<std::string, int> grid_points;

  bool operator==(const SamplerConfig&) const = default;
};

enum class PrunerKind { kNone, kMedian };
std::string_view pruner_kind_name(PrunerKind kind);
std::optional<PrunerKind> parse_pruner_kind(std::string_view name);

struct PrunerConfig {
  PrunerKind kind = PrunerKind::kNone;
  std::int64_t n_warmup_steps = 0;
  std::int64_t n_min_trials = 1;

  bool operator==(const PrunerConfig&) const = default;
};

struct StudyProperties {
  Direction direction = Direction::kMinimize;
  SamplerConfig sampler;
  PrunerConfig pruner;

  bool operator==(const StudyProperties&) const = default;
};

/// Everything a worker sends to define a study. Two definitions with the same
/// canonical text are the same study.
struct StudyDefinition {
  std::string name;
  SearchSpace space;
  StudyProperties properties;
};

/// Checks the space plus the sampler/pruner fields against their kinds.
std::vector<Violation> check_definition(const StudyDefinition& definition);

struct Study {
  std::string study_id;
  std::string owner;
  std::string name;
  std::string fingerprint;  // hex SHA-256 of the canonical text
  SearchSpace space;
  StudyProperties properties;
  TimePoint created_at;
  std::int64_t trial_counter = 0;
};

enum class TrialState { kRunning, kCompleted, kPruned, kFailed };
std::string_view trial_state_name(TrialState state);
std::optional<TrialState> parse_trial_state(std::string_view name);

/// running -> completed | pruned | failed; nothing else.
bool is_legal_transition(TrialState from, TrialState to);

struct Intermediate {
  std::int64_t step = 0;
  double value = 0.0;

  bool operator==(const Intermediate&) const = default;
};

struct Trial {
  std::string trial_id;
  std::string study_id;
  std::int64_t index = 0;
  Assignment params;
  TrialState state = TrialState::kRunning;
  std::vector<Intermediate> intermediates;
  std::optional<double> objective;
  TimePoint opened_at;
  std::optional<TimePoint> closed_at;
};

}  // namespace hposerve
