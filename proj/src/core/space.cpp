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
#include "hposerve/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hposerve {

std::string_view param_kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::kUniform: return "uniform";
    case ParamKind::kLogUniform: return "log-uniform";
    case ParamKind::kInteger: return "integer";
    case ParamKind::kCategorical: return "categorical";
  }
  return "uniform";
}

std::optional<ParamKind> parse_param_kind(std::string_view name) {
  if (name == "uniform") return ParamKind::kUniform;
  if (name == "log-uniform") return ParamKind::kLogUniform;
  if (name == "integer") return ParamKind::kInteger;
  if (name == "categorical") return ParamKind::kCategorical;
  return std::nullopt;
}

ParamSpec ParamSpec::uniform(std::string name, double low, double high) {
  return {std::move(name), ParamKind::kUniform, low, high, {}};
}

ParamSpec ParamSpec::log_uniform(std::string name, double low, double high) {
  return {std::move(name), ParamKind::kLogUniform, low, high, {}};
}

ParamSpec ParamSpec::integer(std::string name, std::int64_t low,
                             std::int64_t high) {
  return {std::move(name), ParamKind::kInteger, static_cast<double>(low),
          static_cast<double>(high), {}};
}

ParamSpec ParamSpec::categorical(std::string name,
                                 std::vector<std::string> choices) {
  return {std::move(name), ParamKind::kCategorical, 0.0, 0.0,
          std::move(choices)};
}

std::vector<ParamSpec> SearchSpace::sorted() const {
  auto out = params_;
  std::stable_sort(out.begin(), out.end(),
                   [](const ParamSpec& a, const ParamSpec& b) {
                     return a.name < b.name;
                   });
  return out;
}

const ParamSpec* SearchSpace::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

// Integer bounds have to survive the round trip through int64.
constexpr double kIntegerLimit = 9.0e15;

bool is_integral(double v) {
  return std::isfinite(v) && std::floor(v) == v && std::fabs(v) <= kIntegerLimit;
}

}  // namespace

std::vector<Violation> check_space(const SearchSpace& space) {
  std::vector<Violation> out;
  if (space.empty()) {
    out.push_back({"EmptySpace", "", "search space has no parameters"});
    return out;
  }
  std::set<std::string> seen;
  std::set<std::string> reported_duplicates;
  for (const auto& p : space.params()) {
    if (p.name.empty()) {
      out.push_back({"EmptyName", "", "parameter name must be non-empty"});
    } else if (!seen.insert(p.name).second &&
               reported_duplicates.insert(p.name).second) {
      out.push_back({"DuplicateName", p.name, "parameter declared twice"});
    }
    if (p.kind == ParamKind::kCategorical) {
      if (p.choices.empty()) {
        out.push_back({"EmptyChoices", p.name, "categorical needs choices"});
      } else {
        std::set<std::string> distinct(p.choices.begin(), p.choices.end());
        if (distinct.size() != p.choices.size()) {
          out.push_back({"DuplicateChoice", p.name, "choices must be distinct"});
        }
      }
      continue;
    }
    if (!p.choices.empty()) {
      out.push_back({"UnexpectedChoices", p.name,
                     "only categorical parameters take choices"});
    }
    if (!std::isfinite(p.low) || !std::isfinite(p.high)) {
      out.push_back({"BadBounds", p.name, "bounds must be finite"});
    } else if (!(p.low < p.high)) {
      out.push_back({"BadBounds", p.name, "low must be < high"});
    } else if (p.kind == ParamKind::kLogUniform && !(p.low > 0.0)) {
      out.push_back({"BadBounds", p.name, "log-uniform requires low > 0"});
    } else if (p.kind == ParamKind::kInteger &&
               (!is_integral(p.low) || !is_integral(p.high))) {
      out.push_back({"BadBounds", p.name, "integer bounds must be integral"});
    }
  }
  return out;
}

void validate_space(const SearchSpace& space) {
  auto violations = check_space(space);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

bool value_conforms(const ParamSpec& spec, const ParamValue& value) {
  switch (spec.kind) {
    case ParamKind::kUniform:
    case ParamKind::kLogUniform: {
      const auto* v = std::get_if<double>(&value);
      return v != nullptr && std::isfinite(*v) && *v >= spec.low &&
             *v <= spec.high;
    }
    case ParamKind::kInteger: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v != nullptr && static_cast<double>(*v) >= spec.low &&
             static_cast<double>(*v) <= spec.high;
    }
    case ParamKind::kCategorical: {
      const auto* v = std::get_if<std::string>(&value);
      return v != nullptr &&
             std::find(spec.choices.begin(), spec.choices.end(), *v) !=
                 spec.choices.end();
    }
  }
  return false;
}

std::vector<std::string> assignment_mismatches(const SearchSpace& space,
                                               const Assignment& params) {
  std::vector<std::string> out;
  for (const auto& p : space.params()) {
    auto it = params.find(p.name);
    if (it == params.end()) {
      out.push_back(p.name + ": missing");
    } else if (!value_conforms(p, it->second)) {
      out.push_back(p.name + ": out of range or wrong type");
    }
  }
  for (const auto& [name, value] : params) {
    if (space.find(name) == nullptr) out.push_back(name + ": not in space");
  }
  return out;
}

double numeric_value(const ParamValue& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&value)) {
    return static_cast<double>(*i);
  }
  return 0.0;
}

}  // namespace hposerve
