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
#include "hposerve/study.hpp"

namespace hposerve {

std::string_view direction_name(Direction direction) {
  return direction == Direction::kMinimize ? "minimize" : "maximize";
}

std::optional<Direction> parse_direction(std::string_view name) {
  if (name == "minimize") return Direction::kMinimize;
  if (name == "maximize") return Direction::kMaximize;
  return std::nullopt;
}

std::string_view sampler_kind_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kRandom: return "random";
    case SamplerKind::kTpe: return "tpe";
    case SamplerKind::kGrid: return "grid";
  }
  return "tpe";
}

std::optional<SamplerKind> parse_sampler_kind(std::string_view name) {
  if (name == "random") return SamplerKind::kRandom;
  if (name == "tpe") return SamplerKind::kTpe;
  if (name == "grid") return SamplerKind::kGrid;
  return std::nullopt;
}

std::string_view pruner_kind_name(PrunerKind kind) {
  return kind == PrunerKind::kMedian ? "median" : "none";
}

std::optional<PrunerKind> parse_pruner_kind(std::string_view name) {
  if (name == "none") return PrunerKind::kNone;
  if (name == "median") return PrunerKind::kMedian;
  return std::nullopt;
}

std::string_view trial_state_name(TrialState state) {
  switch (state) {
    case TrialState::kRunning: return "running";
    case TrialState::kCompleted: return "completed";
    case TrialState::kPruned: return "pruned";
    case TrialState::kFailed: return "failed";
  }
  return "running";
}

std::optional<TrialState> parse_trial_state(std::string_view name) {
  if (name == "running") return TrialState::kRunning;
  if (name == "completed") return TrialState::kCompleted;
  if (name == "pruned") return TrialState::kPruned;
  if (name == "failed") return TrialState::kFailed;
  return std::nullopt;
}

bool is_legal_transition(TrialState from, TrialState to) {
  return from == TrialState::kRunning && to != TrialState::kRunning;
}

std::vector<Violation> check_definition(const StudyDefinition& definition) {
  auto out = check_space(definition.space);
  const auto& sampler = definition.properties.sampler;
  if (sampler.kind == SamplerKind::kTpe) {
    if (sampler.n_startup_trials < 1) {
      out.push_back({"BadSampler", "sampler.n_startup_trials", "must be >= 1"});
    }
    if (!(sampler.gamma > 0.0 && sampler.gamma < 1.0)) {
      out.push_back({"BadSampler", "sampler.gamma", "must be in (0, 1)"});
    }
    if (sampler.n_candidates < 1) {
      out.push_back({"BadSampler", "sampler.n_candidates", "must be >= 1"});
    }
  }
  if (sampler.kind == SamplerKind::kGrid) {
    for (const auto& p : definition.space.params()) {
      if (!p.is_numeric()) continue;
      auto it = sampler.grid_points.find(p.name);
      if (it == sampler.grid_points.end()) {
        out.push_back({"BadSampler", "sampler.grid_points." + p.name,
                       "missing point count"});
      } else if (it->second < 1) {
        out.push_back({"BadSampler", "sampler.grid_points." + p.name,
                       "must be >= 1"});
      }
    }
    for (const auto& [name, n] : sampler.grid_points) {
      const auto* p = definition.space.find(name);
      if (p == nullptr || !p->is_numeric()) {
        out.push_back({"BadSampler", "sampler.grid_points." + name,
                       "not a numeric parameter of the space"});
      }
    }
  }
  const auto& pruner = definition.properties.pruner;
  if (pruner.kind == PrunerKind::kMedian) {
    if (pruner.n_warmup_steps < 0) {
      out.push_back({"BadPruner", "pruner.n_warmup_steps", "must be >= 0"});
    }
    if (pruner.n_min_trials < 1) {
      out.push_back({"BadPruner", "pruner.n_min_trials", "must be >= 1"});
    }
  }
  return out;
}

}  // namespace hposerve
