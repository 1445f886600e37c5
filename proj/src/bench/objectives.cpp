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
#include "hposerve/objectives.hpp"

#include <cmath>
#include <limits>

namespace hposerve::bench {

double sphere(double x0, double x1) { return x0 * x0 + x1 * x1; }

double branin(double x, double y) {
  constexpr double a = 1.0;
  const double b = 5.1 / (4.0 * M_PI * M_PI);
  const double c = 5.0 / M_PI;
  constexpr double r = 6.0;
  constexpr double s = 10.0;
  const double t = 1.0 / (8.0 * M_PI);
  const double u = y - b * x * x + c * x - r;
  return a * u * u + s * (1.0 - t) * std::cos(x) + s;
}

double rosenbrock(double x, double y) {
  return (1.0 - x) * (1.0 - x) + 100.0 * (y - x * x) * (y - x * x);
}

BenchObjective::BenchObjective(ObjectiveKind kind) : kind_(kind) {
  switch (kind) {
    case ObjectiveKind::kSphere:
      space_.add(ParamSpec::uniform("x0", -5.0, 5.0));
      space_.add(ParamSpec::uniform("x1", -5.0, 5.0));
      break;
    case ObjectiveKind::kBranin:
      space_.add(ParamSpec::uniform("x", -5.0, 10.0));
      space_.add(ParamSpec::uniform("y", 0.0, 15.0));
      break;
    case ObjectiveKind::kNoisyRosenbrock:
      space_.add(ParamSpec::uniform("x", -2.0, 2.0));
      space_.add(ParamSpec::uniform("y", -1.0, 3.0));
      break;
  }
}

std::optional<BenchObjective> BenchObjective::by_name(std::string_view name) {
  if (name == "sphere") return BenchObjective(ObjectiveKind::kSphere);
  if (name == "branin") return BenchObjective(ObjectiveKind::kBranin);
  if (name == "noisy_rosenbrock") {
    return BenchObjective(ObjectiveKind::kNoisyRosenbrock);
  }
  return std::nullopt;
}

std::string_view BenchObjective::name() const {
  switch (kind_) {
    case ObjectiveKind::kSphere: return "sphere";
    case ObjectiveKind::kBranin: return "branin";
    case ObjectiveKind::kNoisyRosenbrock: return "noisy_rosenbrock";
  }
  return "sphere";
}

namespace {

double get(const Assignment& params, const char* name) {
  return numeric_value(params.at(name));
}

}  // namespace

double BenchObjective::evaluate(const Assignment& params, Rng& rng) const {
  switch (kind_) {
    case ObjectiveKind::kSphere:
      return sphere(get(params, "x0"), get(params, "x1"));
    case ObjectiveKind::kBranin:
      return branin(get(params, "x"), get(params, "y"));
    case ObjectiveKind::kNoisyRosenbrock: {
      std::normal_distribution<double> noise(0.0, 0.1);
      return rosenbrock(get(params, "x"), get(params, "y")) + noise(rng);
    }
  }
  return 0.0;
}

double BenchObjective::amplitude() const {
  switch (kind_) {
    case ObjectiveKind::kSphere: return 5.0;
    case ObjectiveKind::kBranin: return 10.0;
    case ObjectiveKind::kNoisyRosenbrock: return 50.0;
  }
  return 1.0;
}

double BenchObjective::time_constant(const Assignment& params) const {
  double sum = 0.0;
  for (const auto& [name, value] : params) sum += numeric_value(value);
  return 10.0 * (1.0 + 0.2 * std::sin(sum));
}

double BenchObjective::curve(const Assignment& params, double final_value,
                             std::int64_t step, Rng& rng) const {
  std::normal_distribution<double> noise(0.0, 0.01 * amplitude());
  const double decay =
      std::exp(-static_cast<double>(step) / time_constant(params));
  return final_value + amplitude() * decay + noise(rng);
}

double oracle_random_search(const BenchObjective& objective,
                            std::int64_t n_trials, std::uint64_t seed) {
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n_trials; ++i) {
    Assignment params;
    for (const auto& spec : objective.space().params()) {
      const double u = std::generate_canonical<double, 53>(rng);
      params[spec.name] = spec.low + u * (spec.high - spec.low);
    }
    best = std::min(best, objective.evaluate(params, rng));
  }
  return best;
}

}  // namespace hposerve::bench
