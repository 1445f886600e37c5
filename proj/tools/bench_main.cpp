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
// bench: simulated worker fleet against a running server.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hposerve/campaign.hpp"

int main(int argc, char** argv) {
  using hposerve::bench::CampaignConfig;
  using hposerve::bench::CampaignError;

  CLI::App app{"bench: simulated workers against an hposerve server"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run a campaign and reconcile it");

  CampaignConfig config;
  config.steps = 10;
  config.pruner.n_warmup_steps = 5;
  config.pruner.n_min_trials = 5;
  std::string objective = "branin";
  std::string sampler = "tpe";
  std::string pruner = "none";
  std::string report_path;
  run->add_option("--server", config.server_url, "server base URL")
      ->required();
  run->add_option("--token", config.token, "worker token")->required();
  run->add_option("--objective", objective,
                  "sphere, branin or noisy_rosenbrock");
  run->add_option("--workers", config.n_workers, "concurrent workers")
      ->check(CLI::Range(1, 1024));
  run->add_option("--studies", config.n_studies, "studies run side by side")
      ->check(CLI::Range(1, 256));
  run->add_option("--trials", config.n_trials, "closed trials per study")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--sampler", sampler, "random, tpe or grid");
  run->add_option("--pruner", pruner, "none or median");
  run->add_option("--seed", config.seed, "campaign seed");
  run->add_option("--steps", config.steps,
                  "simulated training steps per trial (0: no pruning calls)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  run->add_option("--fail-rate", config.fail_rate,
                  "probability that a trial reports failure")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--n-startup-trials", config.sampler.n_startup_trials);
  run->add_option("--gamma", config.sampler.gamma);
  run->add_option("--n-candidates", config.sampler.n_candidates);
  run->add_option("--grid-points", config.sampler.grid_points,
                  "name=count pairs for the grid sampler");
  run->add_option("--warmup-steps", config.pruner.n_warmup_steps,
                  "median pruner: steps before any verdict")
      ->capture_default_str();
  run->add_option("--min-trials", config.pruner.n_min_trials,
                  "median pruner: peers needed at a step")
      ->capture_default_str();
  run->add_option("--prefix", config.study_prefix, "study name prefix");
  run->add_flag("--processes", config.processes,
                "one OS process per worker instead of threads");
  run->add_option("--report", report_path, "write the JSON report here");

  CLI11_PARSE(app, argc, argv);

  const auto obj = hposerve::bench::BenchObjective::by_name(objective);
  const auto sampler_kind = hposerve::parse_sampler_kind(sampler);
  const auto pruner_kind = hposerve::parse_pruner_kind(pruner);
  if (!obj || !sampler_kind || !pruner_kind) {
    std::cerr << "unknown objective, sampler or pruner\n";
    return 2;
  }
  config.objective = obj->kind();
  config.sampler.kind = *sampler_kind;
  config.pruner.kind = *pruner_kind;

  try {
    const auto report = hposerve::bench::run_campaign(config);
    std::cout << report.table();
    if (!report_path.empty()) {
      std::ofstream out(report_path);
      out << report.to_json().dump(2) << "\n";
      if (!out) {
        std::cerr << "cannot write " << report_path << "\n";
        return 2;
      }
    }
    return report.ok() ? 0 : 1;
  } catch (const CampaignError& e) {
    std::cerr << "campaign failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
