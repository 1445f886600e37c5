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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hposerve/error.hpp"

namespace hposerve {

enum class ParamKind { kUniform, kLogUniform, kInteger, kCategorical };

std::string_view param_kind_name(ParamKind kind);
std::optional<ParamKind> parse_param_kind(std::string_view name);

/// Where one hyperparameter is searched. `low`/`high` are used by the three
/// numeric kinds (both ends inclusive); `choices` only by categorical.
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kUniform;
  double low = 0.0;
  double high = 0.0;
  std::vector<std::string> choices;

  static ParamSpec uniform(std::string name, double low, double high);
  static ParamSpec log_uniform(std::string name, double low, double high);
  static ParamSpec integer(std::string name, std::int64_t low,
                           std::int64_t high);
  static ParamSpec categorical(std::string name,
                               std::vector<std::string> choices);

  bool is_numeric() const { return kind != ParamKind::kCategorical; }

  bool operator==(const ParamSpec&) const = default;
};

/// Declaration order is kept but carries no meaning; everything that needs a
/// stable order (fingerprint, grid, sampling) walks `sorted()`.
class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<ParamSpec> params)
      : params_(std::move(params)) {}

  const std::vector<ParamSpec>& params() const { return params_; }
  std::vector<ParamSpec> sorted() const;
  const ParamSpec* find(std::string_view name) const;
  bool empty() const { return params_.empty(); }
  std::size_t size() const { return params_.size(); }

  void add(ParamSpec spec) { params_.push_back(std::move(spec)); }

 private:
  std::vector<ParamSpec> params_;
};

/// real | integer | categorical choice
using ParamValue = std::variant<double, std::int64_t, std::string>;
using Assignment = std::map<std::string, ParamValue>;

std::vector<Violation> check_space(const SearchSpace& space);

/// Throws ValidationError listing every violation.
void validate_space(const SearchSpace& space);

/// True when `value` has the tag matching `spec.kind` and lies in range.
bool value_conforms(const ParamSpec& spec, const ParamValue& value);

/// Empty result means `params` assigns exactly one conforming value to each
/// parameter of `space` and nothing else.
std::vector<std::string> assignment_mismatches(const SearchSpace& space,
                                               const Assignment& params);

/// Numeric view of a value for the numeric kinds.
double numeric_value(const ParamValue& value);

}  // namespace hposerve
