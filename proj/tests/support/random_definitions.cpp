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
#include "support/random_definitions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

namespace hposerve::testing {

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string random_label(Rng& rng) {
  static const std::vector<std::string> kPieces = {
      "lr", "x", "y", "depth", "Width", "_", "a", "b", "\"q\"", "back\\slash",
      "é", "日本", "tab\t", "0", "9", " ", "layer.", "-"};
  std::string s;
  const int n = uniform_int(rng, 1, 3);
  for (int i = 0; i < n; ++i) {
    s += kPieces[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(kPieces.size()) - 1))];
  }
  return s;
}

/// A finite double drawn across magnitudes, sometimes an "ugly" binary value.
double random_magnitude(Rng& rng) {
  switch (uniform_int(rng, 0, 3)) {
    case 0:
      return uniform_int(rng, -100, 100);
    case 1:
      return uniform_real(rng, -10.0, 10.0);
    case 2:
      return std::ldexp(uniform_real(rng, -1.0, 1.0), uniform_int(rng, -30, 30));
    default:
      return uniform_int(rng, -5, 5) / 10.0;
  }
}

ParamSpec random_param(const std::string& name, Rng& rng) {
  switch (uniform_int(rng, 0, 3)) {
    case 0: {
      const double low = random_magnitude(rng);
      const double width = std::ldexp(uniform_real(rng, 0.5, 1.0),
                                      uniform_int(rng, -10, 20));
      return ParamSpec::uniform(name, low, low + width);
    }
    case 1: {
      const double low = std::ldexp(uniform_real(rng, 0.5, 1.0),
                                    uniform_int(rng, -30, 5));
      return ParamSpec::log_uniform(name, low,
                                    low * uniform_real(rng, 1.5, 1e6));
    }
    case 2: {
      const auto low = static_cast<std::int64_t>(uniform_int(rng, -1000, 1000));
      return ParamSpec::integer(name, low, low + uniform_int(rng, 1, 1000));
    }
    default: {
      std::vector<std::string> choices;
      std::set<std::string> seen;
      const int n = uniform_int(rng, 1, 5);
      while (static_cast<int>(choices.size()) < n) {
        auto c = random_label(rng);
        if (seen.insert(c).second) choices.push_back(c);
      }
      return ParamSpec::categorical(name, std::move(choices));
    }
  }
}

void fill_grid(StudyDefinition& def, Rng& rng) {
  def.properties.sampler.grid_points.clear();
  for (const auto& p : def.space.params()) {
    if (p.is_numeric()) {
      def.properties.sampler.grid_points[p.name] = uniform_int(rng, 1, 9);
    }
  }
}

std::string fresh_name(const StudyDefinition& def, Rng& rng) {
  for (;;) {
    auto name = random_label(rng);
    if (def.space.find(name) == nullptr) return name;
  }
}

}  // namespace

StudyDefinition random_definition(Rng& rng) {
  StudyDefinition def;
  def.name = random_label(rng);
  const int n = uniform_int(rng, 1, 6);
  while (static_cast<int>(def.space.size()) < n) {
    def.space.add(random_param(fresh_name(def, rng), rng));
  }
  auto& props = def.properties;
  props.direction = uniform_int(rng, 0, 1) ? Direction::kMaximize
                                           : Direction::kMinimize;
  auto& s = props.sampler;
  s.kind = static_cast<SamplerKind>(uniform_int(rng, 0, 2));
  s.seed = rng();
  s.n_startup_trials = uniform_int(rng, 1, 50);
  s.gamma = uniform_real(rng, 0.01, 0.99);
  s.n_candidates = uniform_int(rng, 1, 64);
  if (s.kind == SamplerKind::kGrid) fill_grid(def, rng);
  auto& p = props.pruner;
  p.kind = uniform_int(rng, 0, 1) ? PrunerKind::kMedian : PrunerKind::kNone;
  if (p.kind == PrunerKind::kMedian) {
    p.n_warmup_steps = uniform_int(rng, 0, 20);
    p.n_min_trials = uniform_int(rng, 1, 20);
  }
  return def;
}

StudyDefinition shuffled(const StudyDefinition& def, Rng& rng) {
  auto params = def.space.params();
  std::shuffle(params.begin(), params.end(), rng);
  StudyDefinition out = def;
  out.space = SearchSpace(std::move(params));
  return out;
}

Mutation random_mutation(const StudyDefinition& def, Rng& rng) {
  using Edit = std::function<bool(StudyDefinition&)>;
  // Applies `fn` to one randomly chosen parameter of `d`.
  auto edit_param = [&rng](StudyDefinition& d, const auto& fn) {
    auto params = d.space.params();
    auto& p = params[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(params.size()) - 1))];
    if (!fn(p)) return false;
    d.space = SearchSpace(std::move(params));
    return true;
  };
  const std::vector<std::pair<std::string, Edit>> edits = {
      {"study name", [&](StudyDefinition& d) {
         d.name += "'";
         return true;
       }},
      {"direction", [&](StudyDefinition& d) {
         d.properties.direction = d.properties.direction == Direction::kMinimize
                                      ? Direction::kMaximize
                                      : Direction::kMinimize;
         return true;
       }},
      {"low bound", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           if (!p.is_numeric()) return false;
           if (p.kind == ParamKind::kInteger) {
             p.low -= 1;
           } else {
             const double next = std::nextafter(p.low, p.high);
             if (!(next < p.high)) return false;
             p.low = next;
           }
           return true;
         });
       }},
      {"high bound", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           if (!p.is_numeric()) return false;
           p.high = p.kind == ParamKind::kInteger
                        ? p.high + 1
                        : std::nextafter(p.high, INFINITY);
           return true;
         });
       }},
      {"param kind", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           if (p.kind == ParamKind::kUniform && p.low > 0) {
             p.kind = ParamKind::kLogUniform;
           } else if (p.kind == ParamKind::kLogUniform) {
             p.kind = ParamKind::kUniform;
           } else if (p.kind == ParamKind::kInteger) {
             p.kind = ParamKind::kUniform;
           } else {
             return false;
           }
           return true;
         });
       }},
      {"param name", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           const auto old = p.name;
           p.name = fresh_name(d, rng);
           auto& grid = d.properties.sampler.grid_points;
           if (auto it = grid.find(old); it != grid.end()) {
             const int n = it->second;
             grid.erase(it);
             grid[p.name] = n;
           }
           return true;
         });
       }},
      {"choice order", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           if (p.kind != ParamKind::kCategorical || p.choices.size() < 2) {
             return false;
           }
           std::rotate(p.choices.begin(), p.choices.begin() + 1, p.choices.end());
           return true;
         });
       }},
      {"extra choice", [&](StudyDefinition& d) {
         return edit_param(d, [&](ParamSpec& p) {
           if (p.kind != ParamKind::kCategorical) return false;
           p.choices.push_back("extra#" + std::to_string(p.choices.size()));
           return true;
         });
       }},
      {"extra param", [&](StudyDefinition& d) {
         d.space.add(ParamSpec::categorical(fresh_name(d, rng), {"only"}));
         return true;
       }},
      {"dropped param", [&](StudyDefinition& d) {
         auto params = d.space.params();
         if (params.size() < 2) return false;
         d.properties.sampler.grid_points.erase(params.back().name);
         params.pop_back();
         d.space = SearchSpace(params);
         return true;
       }},
      {"sampler seed", [&](StudyDefinition& d) {
         d.properties.sampler.seed ^= 1;
         return true;
       }},
      {"sampler kind", [&](StudyDefinition& d) {
         auto& s = d.properties.sampler;
         s.kind = s.kind == SamplerKind::kTpe ? SamplerKind::kRandom
                                              : SamplerKind::kTpe;
         s.grid_points.clear();
         return true;
       }},
      {"gamma", [&](StudyDefinition& d) {
         auto& s = d.properties.sampler;
         if (s.kind != SamplerKind::kTpe) return false;
         s.gamma = std::nextafter(s.gamma, 1.0);
         return true;
       }},
      {"startup trials", [&](StudyDefinition& d) {
         auto& s = d.properties.sampler;
         if (s.kind != SamplerKind::kTpe) return false;
         s.n_startup_trials += 1;
         return true;
       }},
      {"candidates", [&](StudyDefinition& d) {
         auto& s = d.properties.sampler;
         if (s.kind != SamplerKind::kTpe) return false;
         s.n_candidates += 1;
         return true;
       }},
      {"grid points", [&](StudyDefinition& d) {
         auto& s = d.properties.sampler;
         if (s.kind != SamplerKind::kGrid || s.grid_points.empty()) return false;
         s.grid_points.begin()->second += 1;
         return true;
       }},
      {"pruner kind", [&](StudyDefinition& d) {
         auto& p = d.properties.pruner;
         p.kind = p.kind == PrunerKind::kNone ? PrunerKind::kMedian
                                              : PrunerKind::kNone;
         return true;
       }},
      {"warmup steps", [&](StudyDefinition& d) {
         auto& p = d.properties.pruner;
         if (p.kind != PrunerKind::kMedian) return false;
         p.n_warmup_steps += 1;
         return true;
       }},
      {"min trials", [&](StudyDefinition& d) {
         auto& p = d.properties.pruner;
         if (p.kind != PrunerKind::kMedian) return false;
         p.n_min_trials += 1;
         return true;
       }},
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto& [what, edit] = edits[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(edits.size()) - 1))];
    StudyDefinition d = def;
    if (edit(d) && check_definition(d).empty()) return {what, std::move(d)};
  }
  throw std::logic_error("no applicable mutation");
}

}  // namespace hposerve::testing
