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
#include "hposerve/sqlite_storage.hpp"

#include <sqlite3.h>

#include <cmath>
#include <condition_variable>
#include <unordered_map>

#include "hposerve/canonical.hpp"
#include "hposerve/crypto.hpp"

namespace hposerve {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kBusyTimeoutMs = 10000;
constexpr std::size_t kIdLength = 24;
constexpr std::size_t kSecretBytes = 32;
constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kTokenIdBytes = 8;

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
  std::string msg = what;
  if (db != nullptr) {
    msg += ": ";
    msg += sqlite3_errmsg(db);
  }
  throw Error(Errc::kStorageUnavailable, msg);
}

class Db {
 public:
  explicit Db(const fs::path& path) {
    const int rc = sqlite3_open_v2(
        path.c_str(), &db_,
        SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX,
        nullptr);
    if (rc != SQLITE_OK) {
      std::string msg = "cannot open " + path.string();
      sqlite3_close_v2(db_);
      db_ = nullptr;
      throw Error(Errc::kStorageUnavailable, msg);
    }
    sqlite3_busy_timeout(db_, kBusyTimeoutMs);
    exec("PRAGMA foreign_keys=ON");
    exec("PRAGMA synchronous=FULL");
  }
  ~Db() { sqlite3_close_v2(db_); }
  Db(const Db&) = delete;
  Db& operator=(const Db&) = delete;

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err != nullptr ? err : "unknown error";
      sqlite3_free(err);
      throw Error(Errc::kStorageUnavailable,
                  std::string("sql failed (") + sql + "): " + msg);
    }
  }

  sqlite3* get() const { return db_; }
  std::int64_t changes() const { return sqlite3_changes(db_); }

 private:
  sqlite3* db_ = nullptr;
};

class Stmt {
 public:
  Stmt(const Db& db, std::string_view sql) : db_(db.get()) {
    if (sqlite3_prepare_v2(db_, sql.data(), static_cast<int>(sql.size()),
                           &stmt_, nullptr) != SQLITE_OK) {
      fail(db_, "prepare");
    }
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& text(int i, std::string_view v) {
    check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()),
                            SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& integer(int i, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, i, v));
    return *this;
  }
  Stmt& real(int i, double v) {
    check(sqlite3_bind_double(stmt_, i, v));
    return *this;
  }
  Stmt& null(int i) {
    check(sqlite3_bind_null(stmt_, i));
    return *this;
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    fail(db_, "step");
  }

  void run() {
    while (step()) {
    }
  }

  std::string col_text(int i) const {
    const auto* p = sqlite3_column_text(stmt_, i);
    return p == nullptr ? std::string{}
                        : std::string(reinterpret_cast<const char*>(p),
                                      static_cast<std::size_t>(
                                          sqlite3_column_bytes(stmt_, i)));
  }
  std::int64_t col_int(int i) const { return sqlite3_column_int64(stmt_, i); }
  double col_real(int i) const { return sqlite3_column_double(stmt_, i); }
  bool col_null(int i) const {
    return sqlite3_column_type(stmt_, i) == SQLITE_NULL;
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, "bind");
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

class Transaction {
 public:
  Transaction(Db& db, bool write) : db_(db) {
    db_.exec(write ? "BEGIN IMMEDIATE" : "BEGIN");
  }
  ~Transaction() {
    if (!done_) {
      sqlite3_exec(db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
    }
  }
  void commit() {
    db_.exec("COMMIT");
    done_ = true;
  }

 private:
  Db& db_;
  bool done_ = false;
};

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS meta(
  key TEXT PRIMARY KEY,
  value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS studies(
  study_id TEXT PRIMARY KEY,
  owner TEXT NOT NULL,
  name TEXT NOT NULL,
  fingerprint TEXT NOT NULL,
  definition TEXT NOT NULL,
  created_at INTEGER NOT NULL,
  trial_counter INTEGER NOT NULL DEFAULT 0,
  revision INTEGER NOT NULL DEFAULT 1,
  UNIQUE(owner, fingerprint));
CREATE TABLE IF NOT EXISTS trials(
  trial_id TEXT PRIMARY KEY,
  study_id TEXT NOT NULL REFERENCES studies(study_id),
  idx INTEGER NOT NULL,
  params TEXT NOT NULL,
  state TEXT NOT NULL,
  objective REAL,
  opened_at INTEGER NOT NULL,
  closed_at INTEGER,
  close_seq INTEGER,
  revision INTEGER NOT NULL DEFAULT 1,
  UNIQUE(study_id, idx));
CREATE INDEX IF NOT EXISTS trials_by_close ON trials(study_id, close_seq);
CREATE TABLE IF NOT EXISTS intermediates(
  trial_id TEXT NOT NULL REFERENCES trials(trial_id),
  step INTEGER NOT NULL,
  value REAL NOT NULL,
  PRIMARY KEY(trial_id, step)) WITHOUT ROWID;
CREATE TABLE IF NOT EXISTS tokens(
  token_id TEXT PRIMARY KEY,
  owner TEXT NOT NULL,
  salt TEXT NOT NULL,
  secret_hash TEXT NOT NULL,
  issued_at INTEGER NOT NULL,
  validity_ms INTEGER NOT NULL,
  revoked INTEGER NOT NULL DEFAULT 0);
)sql";

std::int64_t to_ms(TimePoint t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             t.time_since_epoch())
      .count();
}

TimePoint from_ms(std::int64_t ms) {
  return TimePoint(std::chrono::milliseconds(ms));
}

std::string short_hash(std::string_view text) {
  return crypto::to_hex(crypto::sha256(text)).substr(0, kIdLength);
}

constexpr const char* kTrialColumns =
    "trial_id, study_id, idx, params, state, objective, opened_at, closed_at";

}  // namespace

struct SqliteStorage::Impl {
  fs::path path;
  Clock clock;

  std::mutex write_mutex;
  std::unique_ptr<Db> writer;

  std::mutex pool_mutex;
  std::vector<std::unique_ptr<Db>> idle_readers;

  std::mutex definitions_mutex;
  std::unordered_map<std::string, StudyDefinition> definitions;

  class Reader {
   public:
    explicit Reader(Impl& impl) : impl_(impl) {
      {
        std::lock_guard<std::mutex> lock(impl_.pool_mutex);
        if (!impl_.idle_readers.empty()) {
          db_ = std::move(impl_.idle_readers.back());
          impl_.idle_readers.pop_back();
        }
      }
      if (!db_) db_ = std::make_unique<Db>(impl_.path);
    }
    ~Reader() {
      std::lock_guard<std::mutex> lock(impl_.pool_mutex);
      impl_.idle_readers.push_back(std::move(db_));
    }
    Db& db() { return *db_; }

   private:
    Impl& impl_;
    std::unique_ptr<Db> db_;
  };

  std::int64_t now_ms() const { return to_ms(clock ? clock() : std::chrono::system_clock::now()); }

  const StudyDefinition& definition(Db& db, const std::string& study_id) {
    {
      std::lock_guard<std::mutex> lock(definitions_mutex);
      auto it = definitions.find(study_id);
      if (it != definitions.end()) return it->second;
    }
    Stmt q(db, "SELECT definition FROM studies WHERE study_id = ?");
    q.text(1, study_id);
    if (!q.step()) {
      throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
    }
    auto def = parse_definition(std::string_view(q.col_text(0)));
    std::lock_guard<std::mutex> lock(definitions_mutex);
    return definitions.emplace(study_id, std::move(def)).first->second;
  }

  Study load_study(Db& db, const std::string& study_id) {
    Stmt q(db,
           "SELECT owner, name, fingerprint, created_at, trial_counter "
           "FROM studies WHERE study_id = ?");
    q.text(1, study_id);
    if (!q.step()) {
      throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
    }
    Study s;
    s.study_id = study_id;
    s.owner = q.col_text(0);
    s.name = q.col_text(1);
    s.fingerprint = q.col_text(2);
    s.created_at = from_ms(q.col_int(3));
    s.trial_counter = q.col_int(4);
    const auto& def = definition(db, study_id);
    s.space = def.space;
    s.properties = def.properties;
    return s;
  }

  Trial trial_from_row(Db& db, const Stmt& q) {
    Trial t;
    t.trial_id = q.col_text(0);
    t.study_id = q.col_text(1);
    t.index = q.col_int(2);
    const auto& def = definition(db, t.study_id);
    t.params = assignment_from_json(def.space, json::parse(q.col_text(3)));
    t.state = parse_trial_state(q.col_text(4)).value_or(TrialState::kRunning);
    if (!q.col_null(5)) t.objective = q.col_real(5);
    t.opened_at = from_ms(q.col_int(6));
    if (!q.col_null(7)) t.closed_at = from_ms(q.col_int(7));
    return t;
  }

  Trial load_trial(Db& db, const std::string& trial_id) {
    Stmt q(db, std::string("SELECT ") + kTrialColumns +
                   " FROM trials WHERE trial_id = ?");
    q.text(1, trial_id);
    if (!q.step()) {
      throw Error(Errc::kUnknownTrial, "unknown trial " + trial_id);
    }
    Trial t = trial_from_row(db, q);
    Stmt iv(db,
            "SELECT step, value FROM intermediates WHERE trial_id = ? "
            "ORDER BY step");
    iv.text(1, trial_id);
    while (iv.step()) t.intermediates.push_back({iv.col_int(0), iv.col_real(1)});
    return t;
  }

  StudySummary summarize(Db& db, const std::string& study_id) {
    StudySummary out;
    out.study = load_study(db, study_id);
    Stmt q(db,
           "SELECT state, COUNT(*) FROM trials WHERE study_id = ? "
           "GROUP BY state");
    q.text(1, study_id);
    while (q.step()) {
      const auto state = parse_trial_state(q.col_text(0));
      const auto n = q.col_int(1);
      if (!state) continue;
      switch (*state) {
        case TrialState::kRunning: out.counts.running = n; break;
        case TrialState::kCompleted: out.counts.completed = n; break;
        case TrialState::kPruned: out.counts.pruned = n; break;
        case TrialState::kFailed: out.counts.failed = n; break;
      }
    }
    out.best_objective = best_objective(db, out.study);
    return out;
  }

  std::optional<std::string> best_trial_id(Db& db, const Study& study) {
    const bool minimize = study.properties.direction == Direction::kMinimize;
    Stmt q(db, std::string("SELECT trial_id FROM trials WHERE study_id = ? "
                           "AND state = 'completed' ORDER BY objective ") +
                   (minimize ? "ASC" : "DESC") + ", idx ASC LIMIT 1");
    q.text(1, study.study_id);
    if (!q.step()) return std::nullopt;
    return q.col_text(0);
  }

  std::optional<double> best_objective(Db& db, const Study& study) {
    const bool minimize = study.properties.direction == Direction::kMinimize;
    Stmt q(db, std::string("SELECT objective FROM trials WHERE study_id = ? "
                           "AND state = 'completed' ORDER BY objective ") +
                   (minimize ? "ASC" : "DESC") + ", idx ASC LIMIT 1");
    q.text(1, study.study_id);
    if (!q.step()) return std::nullopt;
    return q.col_real(0);
  }

  /// Shared body of finalize_trial and mark_pruned; caller holds the writer.
  Trial close_trial(const std::string& trial_id, const Outcome& outcome) {
    Db& db = *writer;
    Transaction txn(db, true);
    Stmt q(db, "SELECT state, study_id FROM trials WHERE trial_id = ?");
    q.text(1, trial_id);
    if (!q.step()) {
      throw Error(Errc::kUnknownTrial, "unknown trial " + trial_id);
    }
    const auto from = parse_trial_state(q.col_text(0));
    const std::string study_id = q.col_text(1);
    if (!from || !is_legal_transition(*from, outcome.state)) {
      throw Error(Errc::kIllegalTransition,
                  "trial " + trial_id + " is " + q.col_text(0) +
                      ", cannot become " +
                      std::string(trial_state_name(outcome.state)));
    }
    Stmt u(db,
           "UPDATE trials SET state = ?, objective = ?, closed_at = ?, "
           "close_seq = (SELECT COALESCE(MAX(close_seq), 0) + 1 FROM trials "
           "WHERE study_id = ?), revision = revision + 1 WHERE trial_id = ?");
    u.text(1, trial_state_name(outcome.state));
    if (outcome.objective) {
      u.real(2, *outcome.objective);
    } else {
      u.null(2);
    }
    u.integer(3, now_ms()).text(4, study_id).text(5, trial_id);
    u.run();
    Trial t = load_trial(db, trial_id);
    txn.commit();
    return t;
  }
};

SqliteStorage::SqliteStorage(const fs::path& data_dir, Clock clock)
    : impl_(std::make_unique<Impl>()) {
  std::error_code ec;
  fs::create_directories(data_dir, ec);
  if (ec) {
    throw Error(Errc::kStorageUnavailable,
                "cannot create data directory " + data_dir.string());
  }
  impl_->path = data_dir / "hposerve.db";
  impl_->clock = std::move(clock);
  impl_->writer = std::make_unique<Db>(impl_->path);
  Db& db = *impl_->writer;
  db.exec("PRAGMA journal_mode=WAL");
  Transaction txn(db, true);
  db.exec(kSchema);
  Stmt q(db, "SELECT value FROM meta WHERE key = 'schema_version'");
  if (q.step()) {
    const auto version = std::stoi(q.col_text(0));
    if (version != kSchemaVersion) {
      throw Error(Errc::kStorageUnavailable,
                  "unsupported schema version " + std::to_string(version));
    }
  } else {
    Stmt ins(db, "INSERT INTO meta(key, value) VALUES ('schema_version', ?)");
    ins.text(1, std::to_string(kSchemaVersion));
    ins.run();
  }
  txn.commit();
}

SqliteStorage::~SqliteStorage() = default;

fs::path SqliteStorage::database_path() const { return impl_->path; }

std::pair<Study, bool> SqliteStorage::create_or_attach_study(
    const std::string& owner, const StudyDefinition& definition) {
  validate_space(definition.space);
  const std::string fingerprint =
      crypto::to_hex(canonical_fingerprint(definition));
  const std::string study_id = short_hash(owner + "\n" + fingerprint);

  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  Db& db = *impl_->writer;
  Transaction txn(db, true);
  Stmt existing(db,
                "SELECT study_id FROM studies WHERE owner = ? AND "
                "fingerprint = ?");
  existing.text(1, owner).text(2, fingerprint);
  bool created = false;
  std::string id = study_id;
  if (existing.step()) {
    id = existing.col_text(0);
  } else {
    Stmt ins(db,
             "INSERT INTO studies(study_id, owner, name, fingerprint, "
             "definition, created_at) VALUES (?, ?, ?, ?, ?, ?)");
    ins.text(1, study_id)
        .text(2, owner)
        .text(3, definition.name)
        .text(4, fingerprint)
        .text(5, canonical_text(definition))
        .integer(6, impl_->now_ms());
    ins.run();
    created = true;
  }
  Study study = impl_->load_study(db, id);
  txn.commit();
  return {std::move(study), created};
}

Study SqliteStorage::get_study(const std::string& study_id) {
  Impl::Reader r(*impl_);
  return impl_->load_study(r.db(), study_id);
}

StudySummary SqliteStorage::study_summary(const std::string& study_id) {
  Impl::Reader r(*impl_);
  Transaction txn(r.db(), false);
  auto out = impl_->summarize(r.db(), study_id);
  txn.commit();
  return out;
}

std::vector<StudySummary> SqliteStorage::list_studies(
    const std::optional<std::string>& owner) {
  Impl::Reader r(*impl_);
  Db& db = r.db();
  Transaction txn(db, false);
  std::vector<std::string> ids;
  {
    Stmt q(db, owner ? "SELECT study_id FROM studies WHERE owner = ? "
                       "ORDER BY created_at, study_id"
                     : "SELECT study_id FROM studies ORDER BY created_at, "
                       "study_id");
    if (owner) q.text(1, *owner);
    while (q.step()) ids.push_back(q.col_text(0));
  }
  std::vector<StudySummary> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(impl_->summarize(db, id));
  txn.commit();
  return out;
}

Trial SqliteStorage::open_trial(const std::string& study_id,
                                const Assignment& params) {
  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  Db& db = *impl_->writer;
  Transaction txn(db, true);
  Stmt q(db, "SELECT trial_counter FROM studies WHERE study_id = ?");
  q.text(1, study_id);
  if (!q.step()) throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
  const std::int64_t index = q.col_int(0);

  const auto& def = impl_->definition(db, study_id);
  auto problems = assignment_mismatches(def.space, params);
  if (!problems.empty()) {
    throw Error(Errc::kParamsMismatch, problems.front());
  }
  Stmt bump(db,
            "UPDATE studies SET trial_counter = trial_counter + 1, "
            "revision = revision + 1 WHERE study_id = ?");
  bump.text(1, study_id);
  bump.run();

  const std::string trial_id =
      short_hash(study_id + ":" + std::to_string(index));
  Stmt ins(db,
           "INSERT INTO trials(trial_id, study_id, idx, params, state, "
           "opened_at) VALUES (?, ?, ?, ?, 'running', ?)");
  ins.text(1, trial_id)
      .text(2, study_id)
      .integer(3, index)
      .text(4, assignment_to_json(params).dump())
      .integer(5, impl_->now_ms());
  ins.run();
  Trial t = impl_->load_trial(db, trial_id);
  txn.commit();
  return t;
}

Trial SqliteStorage::finalize_trial(const std::string& trial_id,
                                    const Outcome& outcome) {
  if (outcome.state == TrialState::kCompleted &&
      (!outcome.objective || !std::isfinite(*outcome.objective))) {
    throw Error(Errc::kNonFiniteValue, "objective must be finite");
  }
  if (outcome.state != TrialState::kCompleted &&
      outcome.state != TrialState::kFailed) {
    throw Error(Errc::kIllegalTransition,
                "finalize accepts completed or failed outcomes only");
  }
  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  return impl_->close_trial(trial_id, outcome);
}

Trial SqliteStorage::mark_pruned(const std::string& trial_id) {
  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  return impl_->close_trial(trial_id, {TrialState::kPruned, std::nullopt});
}

void SqliteStorage::record_intermediate(const std::string& trial_id,
                                        std::int64_t step, double value) {
  if (!std::isfinite(value)) {
    throw Error(Errc::kNonFiniteValue, "intermediate value must be finite");
  }
  if (step < 0) {
    throw Error(Errc::kNonMonotonicStep, "step must be non-negative");
  }
  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  Db& db = *impl_->writer;
  Transaction txn(db, true);
  Stmt q(db, "SELECT state FROM trials WHERE trial_id = ?");
  q.text(1, trial_id);
  if (!q.step()) throw Error(Errc::kUnknownTrial, "unknown trial " + trial_id);
  if (q.col_text(0) != "running") {
    throw Error(Errc::kTrialNotRunning,
                "trial " + trial_id + " is " + q.col_text(0));
  }
  Stmt last(db, "SELECT MAX(step) FROM intermediates WHERE trial_id = ?");
  last.text(1, trial_id);
  if (last.step() && !last.col_null(0) && step <= last.col_int(0)) {
    throw Error(Errc::kNonMonotonicStep,
                "step " + std::to_string(step) + " is not after step " +
                    std::to_string(last.col_int(0)));
  }
  Stmt ins(db,
           "INSERT INTO intermediates(trial_id, step, value) VALUES (?, ?, ?)");
  ins.text(1, trial_id).integer(2, step).real(3, value);
  ins.run();
  Stmt bump(db,
            "UPDATE trials SET revision = revision + 1 WHERE trial_id = ?");
  bump.text(1, trial_id);
  bump.run();
  txn.commit();
}

Trial SqliteStorage::get_trial(const std::string& trial_id) {
  Impl::Reader r(*impl_);
  Transaction txn(r.db(), false);
  auto t = impl_->load_trial(r.db(), trial_id);
  txn.commit();
  return t;
}

std::vector<Trial> SqliteStorage::list_trials(const std::string& study_id,
                                              std::optional<TrialState> state) {
  Impl::Reader r(*impl_);
  Db& db = r.db();
  Transaction txn(db, false);
  impl_->definition(db, study_id);  // UnknownStudy check

  std::vector<Trial> out;
  std::unordered_map<std::string, std::size_t> position;
  {
    std::string sql = std::string("SELECT ") + kTrialColumns +
                      " FROM trials WHERE study_id = ?";
    if (state) sql += " AND state = ?";
    sql += " ORDER BY idx";
    Stmt q(db, sql);
    q.text(1, study_id);
    if (state) q.text(2, trial_state_name(*state));
    while (q.step()) {
      out.push_back(impl_->trial_from_row(db, q));
      position.emplace(out.back().trial_id, out.size() - 1);
    }
  }
  Stmt iv(db,
          "SELECT i.trial_id, i.step, i.value FROM intermediates i "
          "JOIN trials t ON t.trial_id = i.trial_id WHERE t.study_id = ? "
          "ORDER BY t.idx, i.step");
  iv.text(1, study_id);
  while (iv.step()) {
    auto it = position.find(iv.col_text(0));
    if (it == position.end()) continue;
    out[it->second].intermediates.push_back({iv.col_int(1), iv.col_real(2)});
  }
  txn.commit();
  return out;
}

std::optional<Trial> SqliteStorage::best_trial(const std::string& study_id) {
  Impl::Reader r(*impl_);
  Db& db = r.db();
  Transaction txn(db, false);
  const Study study = impl_->load_study(db, study_id);
  std::optional<Trial> out;
  if (auto id = impl_->best_trial_id(db, study)) {
    out = impl_->load_trial(db, *id);
  }
  txn.commit();
  return out;
}

ObservationHistory SqliteStorage::observation_history(
    const std::string& study_id) {
  Impl::Reader r(*impl_);
  Db& db = r.db();
  Transaction txn(db, false);
  const auto& def = impl_->definition(db, study_id);
  ObservationHistory h;
  h.direction = def.properties.direction;
  Stmt q(db,
         "SELECT params, objective FROM trials WHERE study_id = ? AND "
         "state = 'completed' ORDER BY close_seq");
  q.text(1, study_id);
  while (q.step()) {
    h.entries.push_back(
        {assignment_from_json(def.space, json::parse(q.col_text(0))),
         q.col_real(1)});
  }
  txn.commit();
  return h;
}

IssuedToken SqliteStorage::issue_token(const std::string& owner,
                                       std::chrono::milliseconds validity) {
  if (validity.count() <= 0) {
    throw ValidationError({{"BadValidity", "validity_seconds", "must be > 0"}});
  }
  const auto id_bytes = crypto::random_bytes(kTokenIdBytes);
  const auto secret_bytes = crypto::random_bytes(kSecretBytes);
  const auto salt = crypto::random_bytes(kSaltBytes);
  const std::string secret = crypto::base64url(secret_bytes);

  std::vector<std::uint8_t> salted(salt);
  salted.insert(salted.end(), secret.begin(), secret.end());

  IssuedToken out;
  out.record.token_id = crypto::to_hex(id_bytes);
  out.record.owner = owner;
  out.record.issued_at = from_ms(impl_->now_ms());
  out.record.validity = validity;
  out.credential = out.record.token_id + "." + secret;

  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  Db& db = *impl_->writer;
  Transaction txn(db, true);
  Stmt ins(db,
           "INSERT INTO tokens(token_id, owner, salt, secret_hash, issued_at, "
           "validity_ms) VALUES (?, ?, ?, ?, ?, ?)");
  ins.text(1, out.record.token_id)
      .text(2, owner)
      .text(3, crypto::to_hex(salt))
      .text(4, crypto::to_hex(crypto::sha256(salted)))
      .integer(5, to_ms(out.record.issued_at))
      .integer(6, validity.count());
  ins.run();
  txn.commit();
  return out;
}

void SqliteStorage::revoke_token(const std::string& token_id) {
  std::lock_guard<std::mutex> lock(impl_->write_mutex);
  Db& db = *impl_->writer;
  Transaction txn(db, true);
  Stmt u(db, "UPDATE tokens SET revoked = 1 WHERE token_id = ?");
  u.text(1, token_id);
  u.run();
  if (db.changes() == 0) {
    throw Error(Errc::kUnknownToken, "unknown token " + token_id);
  }
  txn.commit();
}

namespace {

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    const int hi = nibble(hex[i]);
    const int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return {};
    out.push_back(static_cast<std::uint8_t>(hi * 16 + lo));
  }
  return out;
}

}  // namespace

AuthResult SqliteStorage::authenticate(std::string_view credential) {
  AuthResult result;
  const auto dot = credential.find('.');
  if (dot == std::string_view::npos || dot == 0) return result;
  const std::string token_id(credential.substr(0, dot));
  const std::string_view secret = credential.substr(dot + 1);

  Impl::Reader r(*impl_);
  Stmt q(r.db(),
         "SELECT owner, salt, secret_hash, issued_at, validity_ms, revoked "
         "FROM tokens WHERE token_id = ?");
  q.text(1, token_id);
  if (!q.step()) return result;

  auto salted = from_hex(q.col_text(1));
  salted.insert(salted.end(), secret.begin(), secret.end());
  const auto expected = from_hex(q.col_text(2));
  const auto actual = crypto::sha256(salted);
  if (!crypto::constant_time_equal(expected, actual)) return result;
  if (q.col_int(5) != 0) {
    result.rejection = AuthRejection::kRevoked;
    return result;
  }
  if (impl_->now_ms() >= q.col_int(3) + q.col_int(4)) {
    result.rejection = AuthRejection::kExpired;
    return result;
  }
  result.owner = q.col_text(0);
  result.rejection = AuthRejection::kNone;
  return result;
}

std::vector<TokenRecord> SqliteStorage::list_tokens() {
  Impl::Reader r(*impl_);
  Stmt q(r.db(),
         "SELECT token_id, owner, issued_at, validity_ms, revoked FROM tokens "
         "ORDER BY issued_at, token_id");
  std::vector<TokenRecord> out;
  while (q.step()) {
    TokenRecord t;
    t.token_id = q.col_text(0);
    t.owner = q.col_text(1);
    t.issued_at = from_ms(q.col_int(2));
    t.validity = std::chrono::milliseconds(q.col_int(3));
    t.revoked = q.col_int(4) != 0;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace hposerve
