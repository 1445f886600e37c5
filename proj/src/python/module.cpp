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
// Python bindings for the in-process engine: study definitions and
// fingerprints, samplers, the median rule and the benchmark objectives.
// Structured values cross the boundary as JSON text.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "hposerve/canonical.hpp"
#include "hposerve/crypto.hpp"
#include "hposerve/objectives.hpp"
#include "hposerve/pruner.hpp"
#include "hposerve/sampler.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

hposerve::StudyDefinition definition(const std::string& text) {
  return hposerve::parse_definition(std::string_view(text));
}

hposerve::ObservationHistory history(const hposerve::StudyDefinition& def,
                                     const std::string& text) {
  hposerve::ObservationHistory h;
  h.direction = def.properties.direction;
  const json j = json::parse(text);
  for (const auto& e : j) {
    h.entries.push_back({hposerve::assignment_from_json(def.space, e.at("params")),
                         e.at("objective").get<double>()});
  }
  return h;
}

const hposerve::bench::BenchObjective& objective(const std::string& name) {
  static const hposerve::bench::BenchObjective kSphere(
      hposerve::bench::ObjectiveKind::kSphere);
  static const hposerve::bench::BenchObjective kBranin(
      hposerve::bench::ObjectiveKind::kBranin);
  static const hposerve::bench::BenchObjective kRosenbrock(
      hposerve::bench::ObjectiveKind::kNoisyRosenbrock);
  if (name == "sphere") return kSphere;
  if (name == "branin") return kBranin;
  if (name == "noisy_rosenbrock") return kRosenbrock;
  throw py::value_error("unknown objective: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "hposerve engine";

  static py::exception<hposerve::Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const hposerve::ValidationError& e) {
      json v = json::array();
      for (const auto& x : e.violations()) {
        v.push_back({{"code", x.code}, {"param", x.param},
                     {"message", x.message}});
      }
      PyErr_SetString(error.ptr(), ("validation_failed: " + v.dump()).c_str());
    } catch (const hposerve::Error& e) {
      PyErr_SetString(error.ptr(), (std::string(hposerve::errc_name(e.code())) +
                            ": " + e.what())
                               .c_str());
    }
  });

  m.def("canonical_text",
        [](const std::string& text) {
          return hposerve::canonical_text(definition(text));
        },
        py::arg("definition"),
        "Canonical JSON of a study definition; also the canonical ask body.");
  m.def("fingerprint",
        [](const std::string& text) {
          return hposerve::crypto::to_hex(
              hposerve::canonical_fingerprint(definition(text)));
        },
        py::arg("definition"));

  m.def("suggest",
        [](const std::string& def_text, const std::string& history_text,
           std::int64_t n_taken) {
          const auto def = definition(def_text);
          const auto& sampler = def.properties.sampler;
          const auto params = hposerve::suggest(
              def.space, history(def, history_text), sampler, n_taken,
              hposerve::mix_seed(sampler.seed,
                                 static_cast<std::uint64_t>(n_taken)));
          return hposerve::assignment_to_json(params).dump();
        },
        py::arg("definition"), py::arg("history") = "[]",
        py::arg("n_taken") = 0,
        "Next parameters for a study, as the server would choose them.");
  m.def("grid_size",
        [](const std::string& def_text) {
          const auto def = definition(def_text);
          return hposerve::grid_size(def.space, def.properties.sampler.grid_points);
        },
        py::arg("definition"));

  m.def("median", &hposerve::median, py::arg("values"));
  m.def("should_prune",
        [](double value, std::int64_t step, std::vector<double> peers,
           const std::string& direction, std::int64_t n_warmup_steps,
           std::int64_t n_min_trials) {
          const auto dir = hposerve::parse_direction(direction);
          if (!dir) throw py::value_error("unknown direction: " + direction);
          hposerve::PrunerConfig config;
          config.kind = hposerve::PrunerKind::kMedian;
          config.n_warmup_steps = n_warmup_steps;
          config.n_min_trials = n_min_trials;
          return hposerve::should_prune(value, {step, std::move(peers)}, *dir,
                                        config);
        },
        py::arg("value"), py::arg("step"), py::arg("peer_values"),
        py::arg("direction") = "minimize", py::arg("n_warmup_steps") = 0,
        py::arg("n_min_trials") = 1);

  m.def("evaluate",
        [](const std::string& name, const std::string& params,
           std::uint64_t seed) {
          const auto& obj = objective(name);
          hposerve::Rng rng(seed);
          return obj.evaluate(
              hposerve::assignment_from_json(obj.space(), json::parse(params)),
              rng);
        },
        py::arg("objective"), py::arg("params"), py::arg("seed") = 0);
  m.def("oracle_random_search",
        [](const std::string& name, std::int64_t n_trials, std::uint64_t seed) {
          return hposerve::bench::oracle_random_search(objective(name),
                                                       n_trials, seed);
        },
        py::arg("objective"), py::arg("n_trials"), py::arg("seed") = 0);
  m.def("branin", &hposerve::bench::branin, py::arg("x"), py::arg("y"));
  m.def("sphere", &hposerve::bench::sphere, py::arg("x0"), py::arg("x1"));
  m.def("rosenbrock", &hposerve::bench::rosenbrock, py::arg("x"), py::arg("y"));
  m.attr("BRANIN_MINIMUM") = hposerve::bench::BenchObjective::kBraninMinimum;
}
