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
#include "hposerve/canonical.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "hposerve/crypto.hpp"

namespace hposerve {

using nlohmann::json;

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  // ECMAScript Number::toString layout: plain decimal in [1e-6, 1e21),
  // exponent form (no zero padding, explicit sign) outside it.
  char buf[400];
  const double mag = std::fabs(value);
  if (mag >= 1e-6 && mag < 1e21) {
    auto [end, ec] =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    return std::string(buf, end);
  }
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::scientific);
  std::string s(buf, end);
  const auto e = s.find('e');
  std::string exp = s.substr(e + 2);
  exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
  return s.substr(0, e + 2) + exp;
}

namespace {

std::string quote(const std::string& s) { return json(s).dump(); }

void append_sampler(std::string& out, const SamplerConfig& s) {
  out += "{";
  switch (s.kind) {
    case SamplerKind::kRandom:
      out += "\"kind\":\"random\",\"seed\":" + std::to_string(s.seed);
      break;
    case SamplerKind::kTpe:
      out += "\"gamma\":" + format_number(s.gamma);
      out += ",\"kind\":\"tpe\"";
      out += ",\"n_candidates\":" + std::to_string(s.n_candidates);
      out += ",\"n_startup_trials\":" + std::to_string(s.n_startup_trials);
      out += ",\"seed\":" + std::to_string(s.seed);
      break;
    case SamplerKind::kGrid: {
      out += "\"grid_points\":{";
      bool first = true;
      for (const auto& [name, n] : s.grid_points) {
        if (!first) out += ",";
        first = false;
        out += quote(name) + ":" + std::to_string(n);
      }
      out += "},\"kind\":\"grid\",\"seed\":" + std::to_string(s.seed);
      break;
    }
  }
  out += "}";
}

void append_pruner(std::string& out, const PrunerConfig& p) {
  if (p.kind == PrunerKind::kNone) {
    out += "{\"kind\":\"none\"}";
    return;
  }
  out += "{\"kind\":\"median\",\"n_min_trials\":" +
         std::to_string(p.n_min_trials) +
         ",\"n_warmup_steps\":" + std::to_string(p.n_warmup_steps) + "}";
}

void append_param(std::string& out, const ParamSpec& p) {
  if (p.kind == ParamKind::kCategorical) {
    out += "{\"choices\":[";
    for (std::size_t i = 0; i < p.choices.size(); ++i) {
      if (i > 0) out += ",";
      out += quote(p.choices[i]);
    }
    out += "],\"kind\":\"categorical\"}";
    return;
  }
  out += "{\"high\":" + format_number(p.high) + ",\"kind\":\"";
  out += param_kind_name(p.kind);
  out += "\",\"low\":" + format_number(p.low) + "}";
}

}  // namespace

std::string canonical_text(const StudyDefinition& definition) {
  const auto& props = definition.properties;
  std::string out = "{\"properties\":{\"direction\":\"";
  out += direction_name(props.direction);
  out += "\",\"pruner\":";
  append_pruner(out, props.pruner);
  out += ",\"sampler\":";
  append_sampler(out, props.sampler);
  out += "},\"space\":{";
  bool first = true;
  for (const auto& p : definition.space.sorted()) {
    if (!first) out += ",";
    first = false;
    out += quote(p.name) + ":";
    append_param(out, p);
  }
  out += "},\"study_name\":" + quote(definition.name) + "}";
  return out;
}

Digest canonical_fingerprint(const StudyDefinition& definition) {
  return crypto::sha256(canonical_text(definition));
}

namespace {

// Collects schema problems while walking the body so that one response can
// list all of them.
class Reader {
 public:
  std::vector<Violation> violations;

  void fail(const std::string& path, const std::string& message) {
    violations.push_back({"Schema", path, message});
  }

  bool expect_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void reject_unknown(const json& j, const std::string& path,
                      const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
      if (!allowed.contains(key)) {
        fail(path.empty() ? key : path + "." + key, "unknown field");
      }
    }
  }

  std::optional<std::string> string_field(const json& j, const std::string& key,
                                          const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) {
      fail(path, "missing");
      return std::nullopt;
    }
    if (!it->is_string()) {
      fail(path, "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    double v = j.get<double>();
    if (!std::isfinite(v)) {
      fail(path, "must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::int64_t> integer(const json& j, const std::string& path) {
    if (j.is_number_integer()) {
      if (j.is_number_unsigned() &&
          j.get<std::uint64_t>() >
              static_cast<std::uint64_t>(INT64_MAX)) {
        fail(path, "integer too large");
        return std::nullopt;
      }
      return j.get<std::int64_t>();
    }
    if (j.is_number_float()) {
      double v = j.get<double>();
      if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 9.0e15) {
        return static_cast<std::int64_t>(v);
      }
    }
    fail(path, "expected an integer");
    return std::nullopt;
  }

  std::optional<std::uint64_t> unsigned_integer(const json& j,
                                                const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    auto v = integer(j, path);
    if (!v) return std::nullopt;
    if (*v < 0) {
      fail(path, "must be non-negative");
      return std::nullopt;
    }
    return static_cast<std::uint64_t>(*v);
  }

  std::optional<int> small_int(const json& j, const std::string& path) {
    auto v = integer(j, path);
    if (!v) return std::nullopt;
    if (*v < INT32_MIN || *v > INT32_MAX) {
      fail(path, "out of range");
      return std::nullopt;
    }
    return static_cast<int>(*v);
  }
};

SamplerConfig read_sampler(Reader& r, const json& j) {
  SamplerConfig s;
  const std::string path = "properties.sampler";
  if (!r.expect_object(j, path)) return s;
  auto kind_name = r.string_field(j, "kind", path + ".kind");
  if (!kind_name) return s;
  auto kind = parse_sampler_kind(*kind_name);
  if (!kind) {
    r.fail(path + ".kind", "unknown sampler kind '" + *kind_name + "'");
    return s;
  }
  s.kind = *kind;
  std::set<std::string> allowed{"kind", "seed"};
  if (s.kind == SamplerKind::kTpe) {
    allowed.insert({"n_startup_trials", "gamma", "n_candidates"});
  } else if (s.kind == SamplerKind::kGrid) {
    allowed.insert("grid_points");
  }
  r.reject_unknown(j, path, allowed);
  if (j.contains("seed")) {
    if (auto v = r.unsigned_integer(j["seed"], path + ".seed")) s.seed = *v;
  }
  if (s.kind == SamplerKind::kTpe) {
    if (j.contains("n_startup_trials")) {
      if (auto v = r.small_int(j["n_startup_trials"],
                               path + ".n_startup_trials")) {
        s.n_startup_trials = *v;
      }
    }
    if (j.contains("gamma")) {
      if (auto v = r.number(j["gamma"], path + ".gamma")) s.gamma = *v;
    }
    if (j.contains("n_candidates")) {
      if (auto v = r.small_int(j["n_candidates"], path + ".n_candidates")) {
        s.n_candidates = *v;
      }
    }
  }
  return s;
}

// Grid point counts may name parameters, so they are resolved after the
// space is known.
void read_grid_points(Reader& r, const json& sampler, SamplerConfig& s,
                      const SearchSpace& space) {
  if (s.kind != SamplerKind::kGrid || !sampler.is_object()) return;
  const std::string path = "properties.sampler.grid_points";
  auto it = sampler.find("grid_points");
  if (it == sampler.end()) {
    r.fail(path, "missing");
    return;
  }
  if (it->is_number()) {
    auto n = r.small_int(*it, path);
    if (!n) return;
    for (const auto& p : space.params()) {
      if (p.is_numeric()) s.grid_points[p.name] = *n;
    }
    return;
  }
  if (!it->is_object()) {
    r.fail(path, "expected an integer or an object of integers");
    return;
  }
  for (const auto& [name, value] : it->items()) {
    if (auto n = r.small_int(value, path + "." + name)) {
      s.grid_points[name] = *n;
    }
  }
}

PrunerConfig read_pruner(Reader& r, const json& j) {
  PrunerConfig p;
  const std::string path = "properties.pruner";
  if (!r.expect_object(j, path)) return p;
  auto kind_name = r.string_field(j, "kind", path + ".kind");
  if (!kind_name) return p;
  auto kind = parse_pruner_kind(*kind_name);
  if (!kind) {
    r.fail(path + ".kind", "unknown pruner kind '" + *kind_name + "'");
    return p;
  }
  p.kind = *kind;
  if (p.kind == PrunerKind::kNone) {
    r.reject_unknown(j, path, {"kind"});
    return p;
  }
  r.reject_unknown(j, path, {"kind", "n_warmup_steps", "n_min_trials"});
  if (j.contains("n_warmup_steps")) {
    if (auto v = r.integer(j["n_warmup_steps"], path + ".n_warmup_steps")) {
      p.n_warmup_steps = *v;
    }
  }
  if (j.contains("n_min_trials")) {
    if (auto v = r.integer(j["n_min_trials"], path + ".n_min_trials")) {
      p.n_min_trials = *v;
    }
  }
  return p;
}

std::optional<ParamSpec> read_param(Reader& r, const std::string& name,
                                    const json& j) {
  const std::string path = "space." + name;
  if (!r.expect_object(j, path)) return std::nullopt;
  auto kind_name = r.string_field(j, "kind", path + ".kind");
  if (!kind_name) return std::nullopt;
  auto kind = parse_param_kind(*kind_name);
  if (!kind) {
    r.fail(path + ".kind", "unknown parameter kind '" + *kind_name + "'");
    return std::nullopt;
  }
  ParamSpec spec;
  spec.name = name;
  spec.kind = *kind;
  if (spec.kind == ParamKind::kCategorical) {
    r.reject_unknown(j, path, {"kind", "choices"});
    auto it = j.find("choices");
    if (it == j.end() || !it->is_array()) {
      r.fail(path + ".choices", "expected an array of strings");
      return std::nullopt;
    }
    for (const auto& c : *it) {
      if (!c.is_string()) {
        r.fail(path + ".choices", "expected an array of strings");
        return std::nullopt;
      }
      spec.choices.push_back(c.get<std::string>());
    }
    return spec;
  }
  r.reject_unknown(j, path, {"kind", "low", "high"});
  auto lo = j.find("low");
  auto hi = j.find("high");
  if (lo == j.end()) r.fail(path + ".low", "missing");
  if (hi == j.end()) r.fail(path + ".high", "missing");
  if (lo == j.end() || hi == j.end()) return std::nullopt;
  auto low = r.number(*lo, path + ".low");
  auto high = r.number(*hi, path + ".high");
  if (!low || !high) return std::nullopt;
  spec.low = *low;
  spec.high = *high;
  return spec;
}

}  // namespace

StudyDefinition parse_definition(const json& body) {
  Reader r;
  StudyDefinition def;
  if (!body.is_object()) {
    r.fail("", "request body must be a JSON object");
    throw ValidationError(std::move(r.violations));
  }
  r.reject_unknown(body, "", {"study_name", "properties", "space"});
  if (auto name = r.string_field(body, "study_name", "study_name")) {
    def.name = *name;
  }
  const json* sampler_json = nullptr;
  auto props = body.find("properties");
  if (props == body.end()) {
    r.fail("properties", "missing");
  } else if (r.expect_object(*props, "properties")) {
    r.reject_unknown(*props, "properties", {"direction", "sampler", "pruner"});
    if (auto dir = r.string_field(*props, "direction",
                                  "properties.direction")) {
      if (auto d = parse_direction(*dir)) {
        def.properties.direction = *d;
      } else {
        r.fail("properties.direction", "must be 'minimize' or 'maximize'");
      }
    }
    if (auto it = props->find("sampler"); it != props->end()) {
      sampler_json = &*it;
      def.properties.sampler = read_sampler(r, *it);
    }
    if (auto it = props->find("pruner"); it != props->end()) {
      def.properties.pruner = read_pruner(r, *it);
    }
  }
  auto space = body.find("space");
  if (space == body.end()) {
    r.fail("space", "missing");
  } else if (r.expect_object(*space, "space")) {
    for (const auto& [name, spec] : space->items()) {
      if (auto p = read_param(r, name, spec)) def.space.add(std::move(*p));
    }
  }
  if (sampler_json != nullptr) {
    read_grid_points(r, *sampler_json, def.properties.sampler, def.space);
  }
  if (r.violations.empty()) {
    auto semantic = check_definition(def);
    r.violations.insert(r.violations.end(), semantic.begin(), semantic.end());
  }
  if (!r.violations.empty()) throw ValidationError(std::move(r.violations));
  return def;
}

StudyDefinition parse_definition(std::string_view text) {
  json body = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) {
    throw ValidationError({{"Schema", "", "body is not valid JSON"}});
  }
  return parse_definition(body);
}

json param_value_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return json(v); }, value);
}

std::optional<ParamValue> param_value_from_json(const ParamSpec& spec,
                                                const json& value) {
  switch (spec.kind) {
    case ParamKind::kUniform:
    case ParamKind::kLogUniform:
      if (!value.is_number()) return std::nullopt;
      return ParamValue{value.get<double>()};
    case ParamKind::kInteger:
      if (value.is_number_integer()) {
        return ParamValue{value.get<std::int64_t>()};
      }
      if (value.is_number_float()) {
        double v = value.get<double>();
        if (std::floor(v) == v && std::fabs(v) < 9.0e15) {
          return ParamValue{static_cast<std::int64_t>(v)};
        }
      }
      return std::nullopt;
    case ParamKind::kCategorical:
      if (!value.is_string()) return std::nullopt;
      return ParamValue{value.get<std::string>()};
  }
  return std::nullopt;
}

json assignment_to_json(const Assignment& params) {
  json out = json::object();
  for (const auto& [name, value] : params) {
    out[name] = param_value_to_json(value);
  }
  return out;
}

Assignment assignment_from_json(const SearchSpace& space, const json& params) {
  Assignment out;
  if (!params.is_object()) {
    throw Error(Errc::kParamsMismatch, "params must be an object");
  }
  for (const auto& [name, value] : params.items()) {
    const auto* spec = space.find(name);
    if (spec == nullptr) {
      throw Error(Errc::kParamsMismatch, "unknown parameter " + name);
    }
    auto v = param_value_from_json(*spec, value);
    if (!v) throw Error(Errc::kParamsMismatch, "bad value for " + name);
    out.emplace(name, std::move(*v));
  }
  return out;
}

}  // namespace hposerve
