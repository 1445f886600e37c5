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
#include <gtest/gtest.h>
#include <sqlite3.h>

#include <atomic>
#include <set>
#include <thread>

#include "hposerve/canonical.hpp"
#include "hposerve/crypto.hpp"
#include "hposerve/sqlite_storage.hpp"
#include "support/temp_dir.hpp"

namespace hposerve {
namespace {

using std::chrono::milliseconds;

StudyDefinition sphere_definition(Direction direction = Direction::kMinimize) {
  StudyDefinition def;
  def.name = "sphere";
  def.space = SearchSpace({ParamSpec::uniform("x", -5, 5),
                           ParamSpec::categorical("c", {"a", "b"})});
  def.properties.direction = direction;
  return def;
}

Assignment point(double x, const char* c = "a") {
  return {{"x", x}, {"c", std::string(c)}};
}

template <typename Fn>
Errc error_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::kValidation;
}

/// Settable clock for token expiry.
struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> ms =
      std::make_shared<std::atomic<std::int64_t>>(1'800'000'000'000);
  Clock clock() const {
    auto p = ms;
    return [p] { return TimePoint(milliseconds(p->load())); };
  }
  void advance(milliseconds d) { *ms += d.count(); }
};

class StorageTest : public ::testing::Test {
 protected:
  testing::TempDir dir;
  FakeClock fake;
  SqliteStorage storage{dir.path(), fake.clock()};

  std::string study() {
    return storage.create_or_attach_study("alice", sphere_definition()).first.study_id;
  }
};

TEST_F(StorageTest, AttachIsIdempotent) {
  const auto [a, created_a] = storage.create_or_attach_study("alice", sphere_definition());
  const auto [b, created_b] = storage.create_or_attach_study("alice", sphere_definition());
  EXPECT_TRUE(created_a);
  EXPECT_FALSE(created_b);
  EXPECT_EQ(a.study_id, b.study_id);
  EXPECT_EQ(a.fingerprint, crypto::to_hex(canonical_fingerprint(sphere_definition())));
}

TEST_F(StorageTest, DirectionMakesADifferentStudy) {
  const auto a = storage.create_or_attach_study("alice", sphere_definition()).first;
  const auto b = storage.create_or_attach_study(
      "alice", sphere_definition(Direction::kMaximize)).first;
  EXPECT_NE(a.study_id, b.study_id);
}

TEST_F(StorageTest, StudiesAreScopedPerOwner) {
  const auto a = storage.create_or_attach_study("alice", sphere_definition()).first;
  const auto b = storage.create_or_attach_study("bob", sphere_definition()).first;
  EXPECT_NE(a.study_id, b.study_id);
  EXPECT_EQ(storage.list_studies(std::string("alice")).size(), 1u);
  EXPECT_EQ(storage.list_studies(std::nullopt).size(), 2u);
  EXPECT_TRUE(storage.list_studies(std::string("carol")).empty());
}

TEST_F(StorageTest, ConcurrentAttachCreatesOneRow) {
  std::vector<std::string> ids(20);
  std::atomic<int> created{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 20; ++i) {
    threads.emplace_back([&, i] {
      auto [s, c] = storage.create_or_attach_study("alice", sphere_definition());
      ids[static_cast<std::size_t>(i)] = s.study_id;
      created += c;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(created.load(), 1);
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 1u);
  EXPECT_EQ(storage.list_studies(std::nullopt).size(), 1u);
}

TEST_F(StorageTest, OpenTrialAssignsIndices) {
  const auto id = study();
  const auto t0 = storage.open_trial(id, point(0.1));
  EXPECT_EQ(t0.index, 0);
  EXPECT_EQ(t0.state, TrialState::kRunning);
  EXPECT_FALSE(t0.closed_at);
  EXPECT_EQ(storage.open_trial(id, point(0.2)).index, 1);
  EXPECT_EQ(storage.get_study(id).trial_counter, 2);
}

TEST_F(StorageTest, ConcurrentOpenTrialIsGapFree) {
  const auto id = study();
  std::vector<std::int64_t> idx(50);
  std::vector<std::string> tids(50);
  std::vector<std::thread> threads;
  for (int i = 0; i < 50; ++i) {
    threads.emplace_back([&, i] {
      const auto t = storage.open_trial(id, point(0.0));
      idx[static_cast<std::size_t>(i)] = t.index;
      tids[static_cast<std::size_t>(i)] = t.trial_id;
    });
  }
  for (auto& t : threads) t.join();
  std::sort(idx.begin(), idx.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(idx[static_cast<std::size_t>(i)], i);
  EXPECT_EQ(std::set<std::string>(tids.begin(), tids.end()).size(), 50u);
  EXPECT_EQ(storage.get_study(id).trial_counter, 50);
}

TEST_F(StorageTest, OpenTrialErrors) {
  EXPECT_EQ(error_of([&] { storage.open_trial("nope", point(0)); }), Errc::kUnknownStudy);
  const auto id = study();
  EXPECT_EQ(error_of([&] { storage.open_trial(id, {{"x", 0.0}}); }),
            Errc::kParamsMismatch);
  EXPECT_EQ(error_of([&] { storage.open_trial(id, point(6.0)); }),
            Errc::kParamsMismatch);
}

TEST_F(StorageTest, FinalizeIsExactlyOnce) {
  const auto id = study();
  const auto t = storage.open_trial(id, point(0.1));
  const auto done = storage.finalize_trial(t.trial_id, Outcome::completed(0.42));
  EXPECT_EQ(done.state, TrialState::kCompleted);
  EXPECT_EQ(done.objective, 0.42);
  EXPECT_TRUE(done.closed_at);
  EXPECT_EQ(error_of([&] { storage.finalize_trial(t.trial_id, Outcome::completed(1)); }),
            Errc::kIllegalTransition);
  EXPECT_EQ(error_of([&] { storage.finalize_trial("nope", Outcome::failed()); }),
            Errc::kUnknownTrial);
}

TEST_F(StorageTest, FailedTrialHasNoObjective) {
  const auto id = study();
  const auto t = storage.open_trial(id, point(0.1));
  const auto f = storage.finalize_trial(t.trial_id, Outcome::failed());
  EXPECT_EQ(f.state, TrialState::kFailed);
  EXPECT_FALSE(f.objective);
  EXPECT_TRUE(storage.observation_history(id).entries.empty());
}

TEST_F(StorageTest, PrunedTrialsCannotBeFinalized) {
  const auto id = study();
  const auto t = storage.open_trial(id, point(0.1));
  EXPECT_EQ(storage.mark_pruned(t.trial_id).state, TrialState::kPruned);
  EXPECT_EQ(error_of([&] { storage.mark_pruned(t.trial_id); }), Errc::kIllegalTransition);
  EXPECT_EQ(error_of([&] { storage.finalize_trial(t.trial_id, Outcome::completed(1)); }),
            Errc::kIllegalTransition);
  const auto c = storage.open_trial(id, point(0.2));
  storage.finalize_trial(c.trial_id, Outcome::completed(1));
  EXPECT_EQ(error_of([&] { storage.mark_pruned(c.trial_id); }), Errc::kIllegalTransition);
}

TEST_F(StorageTest, IntermediatesAreStrictlyIncreasing) {
  const auto id = study();
  const auto t = storage.open_trial(id, point(0.1));
  storage.record_intermediate(t.trial_id, 0, 3.0);
  storage.record_intermediate(t.trial_id, 1, 2.0);
  storage.record_intermediate(t.trial_id, 2, 1.0);
  EXPECT_EQ(storage.get_trial(t.trial_id).intermediates,
            (std::vector<Intermediate>{{0, 3.0}, {1, 2.0}, {2, 1.0}}));
  EXPECT_EQ(error_of([&] { storage.record_intermediate(t.trial_id, 1, 0.0); }),
            Errc::kNonMonotonicStep);
  EXPECT_EQ(error_of([&] { storage.record_intermediate(t.trial_id, 2, 0.0); }),
            Errc::kNonMonotonicStep);
  storage.finalize_trial(t.trial_id, Outcome::completed(1.0));
  EXPECT_EQ(error_of([&] { storage.record_intermediate(t.trial_id, 3, 0.0); }),
            Errc::kTrialNotRunning);
  EXPECT_EQ(error_of([&] { storage.record_intermediate("nope", 0, 0.0); }),
            Errc::kUnknownTrial);
}

TEST_F(StorageTest, BestTrialAndHistory) {
  const auto id = study();
  EXPECT_FALSE(storage.best_trial(id));
  const auto a = storage.open_trial(id, point(0.1));
  const auto b = storage.open_trial(id, point(0.2));
  const auto c = storage.open_trial(id, point(0.3));
  // Completion order differs from index order.
  storage.finalize_trial(b.trial_id, Outcome::completed(1.0));
  storage.finalize_trial(a.trial_id, Outcome::completed(3.0));
  EXPECT_EQ(storage.best_trial(id)->index, 1);
  storage.finalize_trial(c.trial_id, Outcome::completed(1.0));
  EXPECT_EQ(storage.best_trial(id)->index, 1);  // tie: lower index
  const auto h = storage.observation_history(id);
  ASSERT_EQ(h.entries.size(), 3u);
  EXPECT_EQ(h.entries[0].params, point(0.2));
  EXPECT_EQ(h.entries[1].params, point(0.1));
  EXPECT_EQ(h.entries[2].params, point(0.3));

  const auto summary = storage.study_summary(id);
  EXPECT_EQ(summary.counts.completed, 3);
  EXPECT_EQ(summary.best_objective, 1.0);
  EXPECT_EQ(storage.list_trials(id, TrialState::kCompleted).size(), 3u);
  EXPECT_TRUE(storage.list_trials(id, TrialState::kRunning).empty());
}

TEST_F(StorageTest, BestTrialUnderMaximize) {
  const auto id = storage.create_or_attach_study(
      "alice", sphere_definition(Direction::kMaximize)).first.study_id;
  const auto a = storage.open_trial(id, point(0.1));
  const auto b = storage.open_trial(id, point(0.2));
  storage.finalize_trial(a.trial_id, Outcome::completed(3.0));
  storage.finalize_trial(b.trial_id, Outcome::completed(1.0));
  EXPECT_EQ(storage.best_trial(id)->index, 0);
}

TEST_F(StorageTest, TokenLifecycle) {
  const auto issued = storage.issue_token("alice", std::chrono::hours(1));
  EXPECT_EQ(storage.authenticate(issued.credential).owner, "alice");
  EXPECT_EQ(issued.credential.rfind(issued.record.token_id + ".", 0), 0u);

  fake.advance(std::chrono::hours(1));
  const auto expired = storage.authenticate(issued.credential);
  EXPECT_FALSE(expired.ok());
  EXPECT_EQ(expired.rejection, AuthRejection::kExpired);

  const auto other = storage.issue_token("bob", std::chrono::hours(1));
  storage.revoke_token(other.record.token_id);
  EXPECT_EQ(storage.authenticate(other.credential).rejection, AuthRejection::kRevoked);

  EXPECT_EQ(storage.authenticate("0123456789abcdef.nothing").rejection,
            AuthRejection::kUnknown);
  EXPECT_EQ(storage.authenticate("garbage").rejection, AuthRejection::kUnknown);
  // Right id, wrong secret.
  EXPECT_EQ(storage.authenticate(other.record.token_id + ".AAAA").rejection,
            AuthRejection::kUnknown);
  EXPECT_EQ(error_of([&] { storage.revoke_token("ffffffffffffffff"); }),
            Errc::kUnknownToken);
  EXPECT_THROW(storage.issue_token("alice", milliseconds(0)), ValidationError);
  EXPECT_EQ(storage.list_tokens().size(), 2u);
}

TEST_F(StorageTest, SecretsAreStoredOnlyAsSaltedHashes) {
  const auto a = storage.issue_token("alice", std::chrono::hours(1));
  const auto secret = a.credential.substr(a.credential.find('.') + 1);
  EXPECT_GE(secret.size(), 43u);  // 32 bytes of base64url
  sqlite3* db = nullptr;
  ASSERT_EQ(sqlite3_open_v2(storage.database_path().c_str(), &db,
                            SQLITE_OPEN_READONLY, nullptr), SQLITE_OK);
  sqlite3_stmt* st = nullptr;
  sqlite3_prepare_v2(db, "SELECT salt, secret_hash FROM tokens", -1, &st, nullptr);
  ASSERT_EQ(sqlite3_step(st), SQLITE_ROW);
  const std::string salt = reinterpret_cast<const char*>(sqlite3_column_text(st, 0));
  const std::string hash = reinterpret_cast<const char*>(sqlite3_column_text(st, 1));
  sqlite3_finalize(st);
  sqlite3_close(db);
  EXPECT_EQ(salt.size(), 32u);
  EXPECT_EQ(hash.find(secret), std::string::npos);
  EXPECT_NE(hash, crypto::to_hex(crypto::sha256(secret)));
}

TEST_F(StorageTest, RevisionIncreasesOnEveryUpdate) {
  const auto id = study();
  const auto t = storage.open_trial(id, point(0.1));
  auto revision = [&](const char* sql, const std::string& key) {
    sqlite3* db = nullptr;
    sqlite3_open_v2(storage.database_path().c_str(), &db, SQLITE_OPEN_READONLY, nullptr);
    sqlite3_stmt* st = nullptr;
    sqlite3_prepare_v2(db, sql, -1, &st, nullptr);
    sqlite3_bind_text(st, 1, key.c_str(), -1, SQLITE_TRANSIENT);
    std::int64_t r = -1;
    if (sqlite3_step(st) == SQLITE_ROW) r = sqlite3_column_int64(st, 0);
    sqlite3_finalize(st);
    sqlite3_close(db);
    return r;
  };
  const char* trial_rev = "SELECT revision FROM trials WHERE trial_id = ?";
  const char* study_rev = "SELECT revision FROM studies WHERE study_id = ?";
  const auto r0 = revision(trial_rev, t.trial_id);
  storage.record_intermediate(t.trial_id, 0, 1.0);
  const auto r1 = revision(trial_rev, t.trial_id);
  storage.finalize_trial(t.trial_id, Outcome::completed(1.0));
  const auto r2 = revision(trial_rev, t.trial_id);
  EXPECT_LT(r0, r1);
  EXPECT_LT(r1, r2);
  const auto s0 = revision(study_rev, id);
  storage.open_trial(id, point(0.2));
  EXPECT_LT(s0, revision(study_rev, id));
}

TEST(StorageReopen, StateSurvivesRestart) {
  testing::TempDir dir;
  std::string study_id, trial_id, credential;
  {
    SqliteStorage s(dir.path());
    study_id = s.create_or_attach_study("alice", sphere_definition()).first.study_id;
    const auto t = s.open_trial(study_id, point(0.25, "b"));
    trial_id = t.trial_id;
    s.record_intermediate(trial_id, 0, 2.5);
    s.finalize_trial(trial_id, Outcome::completed(0.125));
    s.open_trial(study_id, point(-1));
    credential = s.issue_token("alice", std::chrono::hours(1)).credential;
  }
  SqliteStorage s(dir.path());
  const auto t = s.get_trial(trial_id);
  EXPECT_EQ(t.params, point(0.25, "b"));
  EXPECT_EQ(t.objective, 0.125);
  EXPECT_EQ(t.intermediates, (std::vector<Intermediate>{{0, 2.5}}));
  EXPECT_EQ(s.get_study(study_id).trial_counter, 2);
  EXPECT_EQ(s.open_trial(study_id, point(0)).index, 2);
  EXPECT_EQ(s.authenticate(credential).owner, "alice");
  EXPECT_FALSE(s.create_or_attach_study("alice", sphere_definition()).second);
}

TEST(StorageReopen, RejectsNewerSchema) {
  testing::TempDir dir;
  { SqliteStorage s(dir.path()); }
  sqlite3* db = nullptr;
  sqlite3_open((dir.path() / "hposerve.db").c_str(), &db);
  sqlite3_exec(db, "UPDATE meta SET value = '999' WHERE key = 'schema_version'",
               nullptr, nullptr, nullptr);
  sqlite3_close(db);
  EXPECT_THROW(SqliteStorage s(dir.path()), Error);
}

}  // namespace
}  // namespace hposerve
