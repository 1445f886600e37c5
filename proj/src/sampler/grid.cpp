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
#include <cmath>
#include <limits>

#include "hposerve/sampler.hpp"

namespace hposerve {

namespace {

std::vector<ParamValue> axis(const ParamSpec& spec, int points) {
  std::vector<ParamValue> out;
  if (spec.kind == ParamKind::kCategorical) {
    for (const auto& c : spec.choices) out.emplace_back(c);
    return out;
  }
  const bool log_scale = spec.kind == ParamKind::kLogUniform;
  const double lo = log_scale ? std::log(spec.low) : spec.low;
  const double hi = log_scale ? std::log(spec.high) : spec.high;
  for (int i = 0; i < points; ++i) {
    double t;
    if (i == 0) {
      t = spec.low;
    } else if (i == points - 1) {
      t = spec.high;
    } else {
      t = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
      if (log_scale) t = std::exp(t);
    }
    if (spec.kind == ParamKind::kInteger) {
      const auto v = static_cast<std::int64_t>(std::llround(t));
      if (out.empty() || std::get<std::int64_t>(out.back()) != v) {
        out.emplace_back(v);
      }
    } else {
      out.emplace_back(t);
    }
  }
  return out;
}

int points_for(const ParamSpec& spec, const std::map<std::string, int>& points) {
  if (!spec.is_numeric()) return 0;
  auto it = points.find(spec.name);
  return it == points.end() ? 1 : std::max(1, it->second);
}

}  // namespace

std::uint64_t grid_size(const SearchSpace& space,
                        const std::map<std::string, int>& points) {
  std::uint64_t size = 1;
  for (const auto& spec : space.sorted()) {
    const auto n = static_cast<std::uint64_t>(
        axis(spec, points_for(spec, points)).size());
    if (n != 0 && size > std::numeric_limits<std::uint64_t>::max() / n) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    size *= n;
  }
  return size;
}

std::optional<Assignment> grid_next(const SearchSpace& space,
                                    std::int64_t n_taken,
                                    const std::map<std::string, int>& points) {
  if (n_taken < 0) return std::nullopt;
  auto remaining = static_cast<std::uint64_t>(n_taken);
  if (remaining >= grid_size(space, points)) return std::nullopt;
  const auto specs = space.sorted();
  Assignment out;
  // The last name varies fastest.
  for (auto it = specs.rbegin(); it != specs.rend(); ++it) {
    const auto values = axis(*it, points_for(*it, points));
    out.emplace(it->name, values[remaining % values.size()]);
    remaining /= values.size();
  }
  return out;
}

}  // namespace hposerve
