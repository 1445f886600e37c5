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

#include <span>
#include <variant>
#include <vector>

#include "hposerve/random_sampling.hpp"
#include "hposerve/space.hpp"

namespace hposerve {

/// Mixture of truncated Gaussian kernels plus a uniform background over a
/// closed interval of the working axis. The working axis is the raw value for
/// uniform params, ln(value) for log-uniform, and the real line around the
/// integers for integer params (domain [low - 0.5, high + 0.5]).
struct KernelMixture {
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> centers;
  std::vector<double> bandwidths;

  /// Every component (each kernel and the background) has weight 1/(n+1).
  double component_weight() const {
    return 1.0 / static_cast<double>(centers.size() + 1);
  }

  double pdf(double x) const;
  /// Probability mass on [a, b] (clipped to the domain).
  double mass(double a, double b) const;
  double sample(Rng& rng) const;
};

struct CategoricalWeights {
  std::vector<double> probabilities;  // aligned with ParamSpec::choices
};

/// One-dimensional density fitted to the values a parameter took in a set of
/// observations.
class ParzenDensity {
 public:
  ParzenDensity(ParamSpec spec, KernelMixture mixture);
  ParzenDensity(ParamSpec spec, CategoricalWeights weights);

  const ParamSpec& spec() const { return spec_; }
  const KernelMixture* mixture() const {
    return std::get_if<KernelMixture>(&model_);
  }
  const CategoricalWeights* weights() const {
    return std::get_if<CategoricalWeights>(&model_);
  }

  /// Log density on the working axis (continuous kinds), log probability
  /// mass (integer and categorical kinds).
  double log_pdf(const ParamValue& value) const;

  ParamValue sample(Rng& rng) const;

 private:
  ParamSpec spec_;
  std::variant<KernelMixture, CategoricalWeights> model_;
};

/// Throws Error(kValueOutOfRange) if any value does not conform to `spec`.
ParzenDensity fit_parzen(std::span<const ParamValue> values,
                         const ParamSpec& spec);

}  // namespace hposerve
