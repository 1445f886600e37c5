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
#include "hposerve/random_sampling.hpp"

#include <algorithm>
#include <cmath>

namespace hposerve {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ParamValue sample_param(const ParamSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case ParamKind::kUniform: {
      std::uniform_real_distribution<double> dist(spec.low, spec.high);
      return std::clamp(dist(rng), spec.low, spec.high);
    }
    case ParamKind::kLogUniform: {
      std::uniform_real_distribution<double> dist(std::log(spec.low),
                                                  std::log(spec.high));
      return std::clamp(std::exp(dist(rng)), spec.low, spec.high);
    }
    case ParamKind::kInteger: {
      std::uniform_int_distribution<std::int64_t> dist(
          static_cast<std::int64_t>(spec.low),
          static_cast<std::int64_t>(spec.high));
      return dist(rng);
    }
    case ParamKind::kCategorical: {
      std::uniform_int_distribution<std::size_t> dist(0,
                                                      spec.choices.size() - 1);
      return spec.choices[dist(rng)];
    }
  }
  return 0.0;
}

Assignment sample_uniform_random(const SearchSpace& space, Rng& rng) {
  Assignment out;
  for (const auto& spec : space.sorted()) {
    out.emplace(spec.name, sample_param(spec, rng));
  }
  return out;
}

}  // namespace hposerve
