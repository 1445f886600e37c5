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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hposerve/sampler.hpp"
#include "hposerve/study.hpp"

namespace hposerve {

using Clock = std::function<TimePoint()>;

struct StudyCounts {
  std::int64_t running = 0;
  std::int64_t completed = 0;
  std::int64_t pruned = 0;
  std::int64_t failed = 0;

  std::int64_t total() const { return running + completed + pruned + failed; }
  std::int64_t closed() const { return completed + pruned + failed; }
};

struct StudySummary {
  Study study;
  StudyCounts counts;
  std::optional<double> best_objective;
};

struct TokenRecord {
  std::string token_id;
  std::string owner;
  TimePoint issued_at;
  std::chrono::milliseconds validity{0};
  bool revoked = false;

  TimePoint expires_at() const { return issued_at + validity; }
};

/// `credential` is the bearer string handed to the worker, returned once.
struct IssuedToken {
  TokenRecord record;
  std::string credential;
};

enum class AuthRejection { kNone, kUnknown, kExpired, kRevoked };

struct AuthResult {
  std::optional<std::string> owner;
  AuthRejection rejection = AuthRejection::kUnknown;

  bool ok() const { return owner.has_value(); }
};

struct Outcome {
  TrialState state = TrialState::kCompleted;
  std::optional<double> objective;

  static Outcome completed(double objective) {
    return {TrialState::kCompleted, objective};
  }
  static Outcome failed() { return {TrialState::kFailed, std::nullopt}; }
};

/// In-process mutexes that give each study a total order for its mutating
/// sections (sample + open, prune verdicts, finalize).
class StudyLocks {
 public:
  std::unique_lock<std::mutex> lock(const std::string& study_id);

 private:
  std::mutex guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// System of record for studies, trials, intermediate values and API tokens.
/// Every operation is one atomic transaction and may be called from any
/// thread. Failures are reported as hposerve::Error with the matching Errc.
class Storage {
 public:
  virtual ~Storage() = default;

  /// Attach to the study with the same (owner, fingerprint) or create it.
  /// `second` is true only for the call that created the row.
  virtual std::pair<Study, bool> create_or_attach_study(
      const std::string& owner, const StudyDefinition& definition) = 0;

  virtual Study get_study(const std::string& study_id) = 0;
  virtual StudySummary study_summary(const std::string& study_id) = 0;
  /// nullopt lists every owner's studies.
  virtual std::vector<StudySummary> list_studies(
      const std::optional<std::string>& owner) = 0;

  virtual Trial open_trial(const std::string& study_id,
                           const Assignment& params) = 0;
  virtual Trial finalize_trial(const std::string& trial_id,
                               const Outcome& outcome) = 0;
  virtual void record_intermediate(const std::string& trial_id,
                                   std::int64_t step, double value) = 0;
  virtual Trial mark_pruned(const std::string& trial_id) = 0;

  virtual Trial get_trial(const std::string& trial_id) = 0;
  /// Ordered by index; intermediates included.
  virtual std::vector<Trial> list_trials(
      const std::string& study_id, std::optional<TrialState> state) = 0;
  /// Lowest index wins ties.
  virtual std::optional<Trial> best_trial(const std::string& study_id) = 0;
  /// Completed trials in completion order.
  virtual ObservationHistory observation_history(
      const std::string& study_id) = 0;

  virtual IssuedToken issue_token(const std::string& owner,
                                  std::chrono::milliseconds validity) = 0;
  virtual void revoke_token(const std::string& token_id) = 0;
  virtual AuthResult authenticate(std::string_view credential) = 0;
  virtual std::vector<TokenRecord> list_tokens() = 0;

  StudyLocks& locks() { return locks_; }

 private:
  StudyLocks locks_;
};

}  // namespace hposerve
