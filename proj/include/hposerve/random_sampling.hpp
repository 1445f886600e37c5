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
#include <random>

#include "hposerve/space.hpp"

namespace hposerve {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

ParamValue sample_param(const ParamSpec& spec, Rng& rng);

/// Independent draw per parameter, in name order.
Assignment sample_uniform_random(const SearchSpace& space, Rng& rng);

}  // namespace hposerve
