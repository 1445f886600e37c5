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
#include "hposerve/parzen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hposerve {

namespace {

constexpr double kBandwidthFloor = 1e-3;
constexpr int kMaxRejections = 1000;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

}  // namespace

double KernelMixture::pdf(double x) const {
  if (x < lower || x > upper) return 0.0;
  const double w = component_weight();
  double p = w / (upper - lower);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double c = centers[k];
    const double s = bandwidths[k];
    const double z = normal_cdf((upper - c) / s) - normal_cdf((lower - c) / s);
    p += w * normal_pdf((x - c) / s) / (s * z);
  }
  return p;
}

double KernelMixture::mass(double a, double b) const {
  a = std::max(a, lower);
  b = std::min(b, upper);
  if (b <= a) return 0.0;
  const double w = component_weight();
  double m = w * (b - a) / (upper - lower);
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double c = centers[k];
    const double s = bandwidths[k];
    const double z = normal_cdf((upper - c) / s) - normal_cdf((lower - c) / s);
    m += w * (normal_cdf((b - c) / s) - normal_cdf((a - c) / s)) / z;
  }
  return m;
}

double KernelMixture::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, centers.size());
  const std::size_t k = pick(rng);
  if (k == centers.size()) {
    return std::uniform_real_distribution<double>(lower, upper)(rng);
  }
  std::normal_distribution<double> kernel(centers[k], bandwidths[k]);
  for (int i = 0; i < kMaxRejections; ++i) {
    const double x = kernel(rng);
    if (x >= lower && x <= upper) return x;
  }
  // Unreachable in practice: centers lie inside the domain, so every draw
  // lands inside with probability >= 1/2.
  return std::clamp(centers[k], lower, upper);
}

ParzenDensity::ParzenDensity(ParamSpec spec, KernelMixture mixture)
    : spec_(std::move(spec)), model_(std::move(mixture)) {}

ParzenDensity::ParzenDensity(ParamSpec spec, CategoricalWeights weights)
    : spec_(std::move(spec)), model_(std::move(weights)) {}

double ParzenDensity::log_pdf(const ParamValue& value) const {
  switch (spec_.kind) {
    case ParamKind::kUniform:
      return std::log(mixture()->pdf(std::get<double>(value)));
    case ParamKind::kLogUniform:
      return std::log(mixture()->pdf(std::log(std::get<double>(value))));
    case ParamKind::kInteger: {
      const double v = static_cast<double>(std::get<std::int64_t>(value));
      return std::log(mixture()->mass(v - 0.5, v + 0.5));
    }
    case ParamKind::kCategorical: {
      const auto& choice = std::get<std::string>(value);
      const auto it =
          std::find(spec_.choices.begin(), spec_.choices.end(), choice);
      if (it == spec_.choices.end()) {
        return -std::numeric_limits<double>::infinity();
      }
      return std::log(
          weights()->probabilities[static_cast<std::size_t>(
              it - spec_.choices.begin())]);
    }
  }
  return -std::numeric_limits<double>::infinity();
}

ParamValue ParzenDensity::sample(Rng& rng) const {
  switch (spec_.kind) {
    case ParamKind::kUniform:
      return std::clamp(mixture()->sample(rng), spec_.low, spec_.high);
    case ParamKind::kLogUniform:
      return std::clamp(std::exp(mixture()->sample(rng)), spec_.low,
                        spec_.high);
    case ParamKind::kInteger: {
      const double t = std::round(mixture()->sample(rng));
      return static_cast<std::int64_t>(std::clamp(t, spec_.low, spec_.high));
    }
    case ParamKind::kCategorical: {
      const auto& p = weights()->probabilities;
      std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
      return spec_.choices[dist(rng)];
    }
  }
  return 0.0;
}

ParzenDensity fit_parzen(std::span<const ParamValue> values,
                         const ParamSpec& spec) {
  for (const auto& v : values) {
    if (!value_conforms(spec, v)) {
      throw Error(Errc::kValueOutOfRange,
                  "value outside the range of parameter " + spec.name);
    }
  }
  const double n = static_cast<double>(values.size());
  if (spec.kind == ParamKind::kCategorical) {
    CategoricalWeights w;
    const double total = n + static_cast<double>(spec.choices.size());
    for (const auto& choice : spec.choices) {
      const auto count = std::count_if(values.begin(), values.end(),
                                       [&](const ParamValue& v) {
                                         return std::get<std::string>(v) ==
                                                choice;
                                       });
      w.probabilities.push_back((static_cast<double>(count) + 1.0) / total);
    }
    return {spec, std::move(w)};
  }

  KernelMixture m;
  double range = spec.high - spec.low;
  switch (spec.kind) {
    case ParamKind::kUniform:
      m.lower = spec.low;
      m.upper = spec.high;
      break;
    case ParamKind::kLogUniform:
      m.lower = std::log(spec.low);
      m.upper = std::log(spec.high);
      range = m.upper - m.lower;
      break;
    case ParamKind::kInteger:
      m.lower = spec.low - 0.5;
      m.upper = spec.high + 0.5;
      break;
    case ParamKind::kCategorical:
      break;
  }
  const double bandwidth =
      std::max(range / std::max(1.0, n), range * kBandwidthFloor);
  for (const auto& v : values) {
    double c = numeric_value(v);
    if (spec.kind == ParamKind::kLogUniform) c = std::log(c);
    m.centers.push_back(std::clamp(c, m.lower, m.upper));
    m.bandwidths.push_back(bandwidth);
  }
  return {spec, std::move(m)};
}

}  // namespace hposerve
