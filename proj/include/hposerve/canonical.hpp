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

// Canonical text form of a study definition.
//
// The canonical text is compact JSON with object keys in lexicographic order,
// parameters keyed (and therefore sorted) by name, categorical choices in
// declared order, and every number written in shortest round-trip decimal
// form. Only fields meaningful for the chosen sampler/pruner kinds appear,
// with defaults filled in. It is byte-for-byte the body of an ask request
// with the same definition:
//
//   {"properties":{"direction":"minimize",
//                  "pruner":{"kind":"median","n_min_trials":5,"n_warmup_steps":5},
//                  "sampler":{"gamma":0.25,"kind":"tpe","n_candidates":24,
//                             "n_startup_trials":10,"seed":7}},
//    "space":{"x":{"high":5,"kind":"uniform","low":-5}},
//    "study_name":"demo"}
//
// (whitespace added for reading only).

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hposerve/study.hpp"

namespace hposerve {

using Digest = std::array<std::uint8_t, 32>;

/// Shortest decimal that parses back to exactly `value`, laid out like
/// JavaScript Number#toString: 0.0001, 1e-7, 1.5e+21.
std::string format_number(double value);

std::string canonical_text(const StudyDefinition& definition);

/// SHA-256 of canonical_text(definition).
Digest canonical_fingerprint(const StudyDefinition& definition);

/// Parses the wire form of an ask body (study_name / properties / space),
/// filling defaults. Unknown or kind-inapplicable fields, type errors, and
/// every space/config invariant violation are collected and thrown together
/// as one ValidationError.
StudyDefinition parse_definition(const nlohmann::json& body);
StudyDefinition parse_definition(std::string_view text);

nlohmann::json param_value_to_json(const ParamValue& value);
std::optional<ParamValue> param_value_from_json(const ParamSpec& spec,
                                                const nlohmann::json& value);

nlohmann::json assignment_to_json(const Assignment& params);

/// Lenient decode for records written by this process; throws on mismatch.
Assignment assignment_from_json(const SearchSpace& space,
                                const nlohmann::json& params);

}  // namespace hposerve
