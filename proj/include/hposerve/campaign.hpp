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

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hposerve/objectives.hpp"
#include "hposerve/study.hpp"

namespace hposerve::bench {

/// Raw status and body of one exchange; status 0 means the request never got
/// a response (connection refused, reset, timeout).
struct WireResponse {
  int status = 0;
  std::string body;
  /// Why no response arrived, when status is 0.
  std::string transport_error;

  nlohmann::json json() const;
};

/// Minimal blocking client for the worker protocol and the read API. One
/// instance per thread.
class ProtocolClient {
 public:
  ProtocolClient(const std::string& server_url, std::string token);
  ~ProtocolClient();
  ProtocolClient(ProtocolClient&&) noexcept;
  ProtocolClient& operator=(ProtocolClient&&) noexcept;

  const std::string& token() const { return token_; }

  WireResponse ask(const std::string& body);
  WireResponse tell(const std::string& body);
  WireResponse should_prune(const std::string& body);

  /// Read API with the worker token (or `bearer` if given) as a bearer
  /// credential.
  WireResponse get(const std::string& path,
                   const std::optional<std::string>& bearer = std::nullopt);
  WireResponse post(const std::string& path, const std::string& body,
                    const std::optional<std::string>& bearer = std::nullopt);
  WireResponse del(const std::string& path,
                   const std::optional<std::string>& bearer = std::nullopt);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string token_;
};

class CampaignError : public std::runtime_error {
 public:
  enum class Kind { kServerUnreachable, kAuthRejected, kBudgetExhausted,
                    kProtocol };
  CampaignError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct CampaignConfig {
  std::string server_url = "http://127.0.0.1:8080";
  std::string token;
  ObjectiveKind objective = ObjectiveKind::kBranin;
  int n_workers = 1;
  int n_studies = 1;
  /// Closed trials each study must hold at the end.
  std::int64_t n_trials = 100;
  SamplerConfig sampler;
  PrunerConfig pruner;
  /// Simulated training steps per trial; 0 skips should_prune entirely.
  std::int64_t steps = 0;
  /// Probability that a trial reports failure instead of an objective.
  double fail_rate = 0.0;
  /// Study i uses sampler seed `seed + i`; trial noise derives from it too.
  std::uint64_t seed = 0;
  std::string study_prefix = "bench";
  /// Fork one OS process per worker instead of running threads.
  bool processes = false;
};

struct TrialRecord {
  std::int64_t index = 0;
  std::string trial_id;
  TrialState state = TrialState::kRunning;
  std::optional<double> objective;
  /// Final value of the simulated run, known even when it was pruned.
  double final_value = 0.0;
  std::int64_t steps = 0;
  int worker = 0;
  nlohmann::json params;
};

struct StudyReport {
  std::string study_id;
  std::string name;
  std::uint64_t sampler_seed = 0;
  std::int64_t asks = 0;
  std::int64_t completed = 0;
  std::int64_t pruned = 0;
  std::int64_t failed = 0;
  std::optional<double> best_objective;
  double wall_seconds = 0.0;
  std::int64_t total_steps = 0;
  /// Ordered by index.
  std::vector<TrialRecord> trials;
};

struct WorkerReport {
  int worker = 0;
  std::int64_t asks = 0;
  std::int64_t completed = 0;
  std::int64_t pruned = 0;
  std::int64_t failed = 0;
  std::int64_t steps = 0;
};

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct CampaignReport {
  CampaignConfig config;
  double wall_seconds = 0.0;
  std::vector<StudyReport> studies;
  std::vector<WorkerReport> workers;
  std::vector<Check> checks;

  bool ok() const;
  std::int64_t total_steps() const;
  nlohmann::json to_json() const;
  std::string table() const;
};

/// Ask body for study `study_index` of the campaign.
std::string study_request(const CampaignConfig& config, int study_index);

/// Runs the campaign, then reconciles the client-side log with the server's
/// accounting; failed reconciliations show up in `checks`, not as errors.
/// Throws CampaignError for an unreachable server, a rejected token, or a
/// grid study that runs out of points.
CampaignReport run_campaign(const CampaignConfig& config);

}  // namespace hposerve::bench
