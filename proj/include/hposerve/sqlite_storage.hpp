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

#include <filesystem>
#include <memory>

#include "hposerve/storage.hpp"

namespace hposerve {

/// Storage on an embedded SQLite database (WAL journal, synchronous=FULL) in
/// `data_dir`. A commit that returned has reached stable storage, so an
/// acknowledged write survives kill -9 and restart.
class SqliteStorage final : public Storage {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit SqliteStorage(const std::filesystem::path& data_dir,
                         Clock clock = nullptr);
  ~SqliteStorage() override;

  SqliteStorage(const SqliteStorage&) = delete;
  SqliteStorage& operator=(const SqliteStorage&) = delete;

  std::pair<Study, bool> create_or_attach_study(
      const std::string& owner, const StudyDefinition& definition) override;
  Study get_study(const std::string& study_id) override;
  StudySummary study_summary(const std::string& study_id) override;
  std::vector<StudySummary> list_studies(
      const std::optional<std::string>& owner) override;

  Trial open_trial(const std::string& study_id,
                   const Assignment& params) override;
  Trial finalize_trial(const std::string& trial_id,
                       const Outcome& outcome) override;
  void record_intermediate(const std::string& trial_id, std::int64_t step,
                           double value) override;
  Trial mark_pruned(const std::string& trial_id) override;

  Trial get_trial(const std::string& trial_id) override;
  std::vector<Trial> list_trials(const std::string& study_id,
                                 std::optional<TrialState> state) override;
  std::optional<Trial> best_trial(const std::string& study_id) override;
  ObservationHistory observation_history(const std::string& study_id) override;

  IssuedToken issue_token(const std::string& owner,
                          std::chrono::milliseconds validity) override;
  void revoke_token(const std::string& token_id) override;
  AuthResult authenticate(std::string_view credential) override;
  std::vector<TokenRecord> list_tokens() override;

  std::filesystem::path database_path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hposerve
