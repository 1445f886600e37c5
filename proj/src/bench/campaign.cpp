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
#include "hposerve/campaign.hpp"

#include <sys/mman.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "hposerve/canonical.hpp"
#include "hposerve/random_sampling.hpp"

namespace hposerve::bench {

using nlohmann::json;

nlohmann::json WireResponse::json() const {
  return nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
}

// ---------------------------------------------------------------- client

struct ProtocolClient::Impl {
  explicit Impl(const std::string& url) : client(url) {
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::seconds(60));
    client.set_write_timeout(std::chrono::seconds(60));
  }
  httplib::Client client;
};

ProtocolClient::ProtocolClient(const std::string& server_url,
                               std::string token)
    : impl_(std::make_unique<Impl>(server_url)), token_(std::move(token)) {}
ProtocolClient::~ProtocolClient() = default;
ProtocolClient::ProtocolClient(ProtocolClient&&) noexcept = default;
ProtocolClient& ProtocolClient::operator=(ProtocolClient&&) noexcept = default;

namespace {

WireResponse convert(const httplib::Result& r) {
  if (!r) return {0, "", httplib::to_string(r.error())};
  return {r->status, r->body, ""};
}

httplib::Headers auth_headers(const std::string& credential) {
  return {{"Authorization", "Bearer " + credential}};
}

}  // namespace

WireResponse ProtocolClient::ask(const std::string& body) {
  return convert(
      impl_->client.Post("/api/ask/" + token_, body, "application/json"));
}

WireResponse ProtocolClient::tell(const std::string& body) {
  return convert(
      impl_->client.Post("/api/tell/" + token_, body, "application/json"));
}

WireResponse ProtocolClient::should_prune(const std::string& body) {
  return convert(impl_->client.Post("/api/should_prune/" + token_, body,
                                    "application/json"));
}

WireResponse ProtocolClient::get(const std::string& path,
                                 const std::optional<std::string>& bearer) {
  return convert(
      impl_->client.Get(path, auth_headers(bearer.value_or(token_))));
}

WireResponse ProtocolClient::post(const std::string& path,
                                  const std::string& body,
                                  const std::optional<std::string>& bearer) {
  return convert(impl_->client.Post(path, auth_headers(bearer.value_or(token_)),
                                    body, "application/json"));
}

WireResponse ProtocolClient::del(const std::string& path,
                                 const std::optional<std::string>& bearer) {
  return convert(
      impl_->client.Delete(path, auth_headers(bearer.value_or(token_))));
}

// ---------------------------------------------------------------- campaign

namespace {

using Steady = std::chrono::steady_clock;

std::uint64_t study_seed(const CampaignConfig& config, int study_index) {
  return config.seed + static_cast<std::uint64_t>(study_index);
}

StudyDefinition study_definition(const CampaignConfig& config,
                                 int study_index) {
  const BenchObjective objective(config.objective);
  StudyDefinition def;
  def.name = config.study_prefix + "-" + std::string(objective.name()) + "-" +
             std::to_string(study_index);
  def.space = objective.space();
  def.properties.direction = Direction::kMinimize;
  def.properties.sampler = config.sampler;
  def.properties.sampler.seed = study_seed(config, study_index);
  def.properties.pruner = config.pruner;
  return def;
}

/// Reservation counters shared by every worker, thread or process.
struct SharedState {
  static constexpr int kMaxStudies = 256;
  std::atomic<std::int64_t> reserved[kMaxStudies];
  std::atomic<int> abort;
};
static_assert(std::atomic<std::int64_t>::is_always_lock_free);

struct WorkerResult {
  WorkerReport report;
  std::map<int, std::string> study_ids;
  std::vector<std::pair<int, TrialRecord>> trials;
  std::map<int, double> last_close;  // seconds since campaign start
  std::optional<CampaignError::Kind> error;
  std::string error_message;
};

json trial_to_json(const TrialRecord& t) {
  return {{"index", t.index},
          {"trial_id", t.trial_id},
          {"state", trial_state_name(t.state)},
          {"objective", t.objective ? json(*t.objective) : json(nullptr)},
          {"final_value", t.final_value},
          {"steps", t.steps},
          {"worker", t.worker},
          {"params", t.params}};
}

TrialRecord trial_from_json(const json& j) {
  TrialRecord t;
  t.index = j.at("index").get<std::int64_t>();
  t.trial_id = j.at("trial_id").get<std::string>();
  t.state = *parse_trial_state(j.at("state").get<std::string>());
  if (!j.at("objective").is_null()) t.objective = j.at("objective").get<double>();
  t.final_value = j.at("final_value").get<double>();
  t.steps = j.at("steps").get<std::int64_t>();
  t.worker = j.at("worker").get<int>();
  t.params = j.at("params");
  return t;
}

json result_to_json(const WorkerResult& r) {
  json trials = json::array();
  for (const auto& [s, t] : r.trials) {
    trials.push_back({{"study", s}, {"trial", trial_to_json(t)}});
  }
  json ids = json::object();
  for (const auto& [s, id] : r.study_ids) ids[std::to_string(s)] = id;
  json close = json::object();
  for (const auto& [s, t] : r.last_close) close[std::to_string(s)] = t;
  return {{"worker", r.report.worker},
          {"asks", r.report.asks},
          {"completed", r.report.completed},
          {"pruned", r.report.pruned},
          {"failed", r.report.failed},
          {"steps", r.report.steps},
          {"study_ids", ids},
          {"last_close", close},
          {"trials", trials},
          {"error", r.error ? json(static_cast<int>(*r.error)) : json(nullptr)},
          {"error_message", r.error_message}};
}

WorkerResult result_from_json(const json& j) {
  WorkerResult r;
  r.report.worker = j.at("worker").get<int>();
  r.report.asks = j.at("asks").get<std::int64_t>();
  r.report.completed = j.at("completed").get<std::int64_t>();
  r.report.pruned = j.at("pruned").get<std::int64_t>();
  r.report.failed = j.at("failed").get<std::int64_t>();
  r.report.steps = j.at("steps").get<std::int64_t>();
  for (const auto& [k, v] : j.at("study_ids").items()) {
    r.study_ids[std::stoi(k)] = v.get<std::string>();
  }
  for (const auto& [k, v] : j.at("last_close").items()) {
    r.last_close[std::stoi(k)] = v.get<double>();
  }
  for (const auto& e : j.at("trials")) {
    r.trials.emplace_back(e.at("study").get<int>(),
                          trial_from_json(e.at("trial")));
  }
  if (!j.at("error").is_null()) {
    r.error = static_cast<CampaignError::Kind>(j.at("error").get<int>());
  }
  r.error_message = j.at("error_message").get<std::string>();
  return r;
}

/// Maps a non-200 protocol response to the campaign error it implies.
[[noreturn]] void fail_response(const char* what, const WireResponse& r) {
  using Kind = CampaignError::Kind;
  if (r.status == 0) {
    throw CampaignError(Kind::kServerUnreachable,
                        std::string(what) + ": server unreachable (" +
                            r.transport_error + ")");
  }
  if (r.status == 401) {
    throw CampaignError(Kind::kAuthRejected,
                        std::string(what) + ": token rejected");
  }
  const auto body = r.json();
  if (r.status == 409 && body.is_object() &&
      body.value("error", "") == "grid_exhausted") {
    throw CampaignError(Kind::kBudgetExhausted,
                        std::string(what) + ": grid exhausted");
  }
  throw CampaignError(Kind::kProtocol, std::string(what) + ": HTTP " +
                                           std::to_string(r.status) + " " +
                                           r.body);
}

class Worker {
 public:
  Worker(const CampaignConfig& config, int index, SharedState& shared,
         Steady::time_point start)
      : config_(config),
        index_(index),
        shared_(shared),
        start_(start),
        objective_(config.objective),
        client_(config.server_url, config.token) {
    result_.report.worker = index;
  }

  WorkerResult run() {
    try {
      // Own study first, then help the others drain their budgets.
      for (int k = 0; k < config_.n_studies; ++k) {
        const int s = (index_ + k) % config_.n_studies;
        const auto body = study_request(config_, s);
        while (shared_.abort.load() == 0 &&
               shared_.reserved[s].fetch_add(1) < config_.n_trials) {
          run_trial(s, body);
        }
      }
    } catch (const CampaignError& e) {
      shared_.abort.store(1);
      result_.error = e.kind();
      result_.error_message = e.what();
    } catch (const std::exception& e) {
      shared_.abort.store(1);
      result_.error = CampaignError::Kind::kProtocol;
      result_.error_message = e.what();
    }
    return std::move(result_);
  }

 private:
  void run_trial(int s, const std::string& body) {
    const auto asked = client_.ask(body);
    if (asked.status != 200) fail_response("ask", asked);
    const json a = asked.json();
    ++result_.report.asks;

    TrialRecord t;
    t.worker = index_;
    t.trial_id = a.at("trial_id").get<std::string>();
    t.index = a.at("trial_index").get<std::int64_t>();
    t.params = a.at("params");
    result_.study_ids[s] = a.at("study_id").get<std::string>();

    const Assignment params =
        assignment_from_json(objective_.space(), t.params);
    Rng rng(mix_seed(study_seed(config_, s), static_cast<std::uint64_t>(t.index)));
    t.final_value = objective_.evaluate(params, rng);
    const bool fails =
        std::generate_canonical<double, 53>(rng) < config_.fail_rate;
    const std::int64_t last_step = fails ? config_.steps / 2 : config_.steps;

    bool pruned = false;
    for (std::int64_t step = 0; step < last_step && !pruned; ++step) {
      const double value = objective_.curve(params, t.final_value, step, rng);
      const auto r = client_.should_prune(
          json{{"trial_id", t.trial_id}, {"step", step}, {"value", value}}
              .dump());
      if (r.status != 200) fail_response("should_prune", r);
      ++t.steps;
      pruned = r.json().at("prune").get<bool>();
    }

    if (pruned) {
      t.state = TrialState::kPruned;
      ++result_.report.pruned;
    } else {
      json tell = {{"trial_id", t.trial_id}};
      if (fails) {
        tell["state"] = "failed";
      } else {
        tell["objective"] = t.final_value;
      }
      const auto r = client_.tell(tell.dump());
      if (r.status != 200) fail_response("tell", r);
      if (fails) {
        t.state = TrialState::kFailed;
        ++result_.report.failed;
      } else {
        t.state = TrialState::kCompleted;
        t.objective = t.final_value;
        ++result_.report.completed;
      }
    }
    result_.report.steps += t.steps;
    result_.last_close[s] =
        std::chrono::duration<double>(Steady::now() - start_).count();
    result_.trials.emplace_back(s, std::move(t));
  }

  const CampaignConfig& config_;
  int index_;
  SharedState& shared_;
  Steady::time_point start_;
  BenchObjective objective_;
  ProtocolClient client_;
  WorkerResult result_;
};

std::vector<WorkerResult> run_threads(const CampaignConfig& config,
                                      SharedState& shared,
                                      Steady::time_point start) {
  std::vector<WorkerResult> results(static_cast<std::size_t>(config.n_workers));
  std::vector<std::thread> threads;
  for (int w = 0; w < config.n_workers; ++w) {
    threads.emplace_back([&, w] {
      results[static_cast<std::size_t>(w)] =
          Worker(config, w, shared, start).run();
    });
  }
  for (auto& t : threads) t.join();
  return results;
}

std::string read_all(int fd) {
  std::string out;
  char buf[1 << 16];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n > 0) {
      out.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  return out;
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return;
    }
    off += static_cast<std::size_t>(n);
  }
}

std::vector<WorkerResult> run_processes(const CampaignConfig& config,
                                        SharedState& shared,
                                        Steady::time_point start) {
  std::vector<std::pair<pid_t, int>> children;
  for (int w = 0; w < config.n_workers; ++w) {
    int fds[2];
    if (::pipe(fds) != 0) throw std::runtime_error("pipe failed");
    const pid_t pid = ::fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
      ::close(fds[0]);
      for (const auto& [_, fd] : children) ::close(fd);
      const auto result = Worker(config, w, shared, start).run();
      write_all(fds[1], result_to_json(result).dump());
      ::close(fds[1]);
      ::_exit(0);
    }
    ::close(fds[1]);
    children.emplace_back(pid, fds[0]);
  }
  std::vector<WorkerResult> results;
  for (const auto& [pid, fd] : children) {
    const auto text = read_all(fd);
    ::close(fd);
    int status = 0;
    ::waitpid(pid, &status, 0);
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error("worker process " + std::to_string(pid) +
                               " exited without a result");
    }
    results.push_back(result_from_json(j));
  }
  return results;
}

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

void reconcile(CampaignReport& report, ProtocolClient& client) {
  auto add = [&](std::string name, bool ok, std::string detail) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  std::set<std::string> ids;
  std::int64_t records = 0;
  for (const auto& s : report.studies) {
    for (const auto& t : s.trials) {
      ids.insert(t.trial_id);
      ++records;
    }
  }
  add("unique trial ids", static_cast<std::int64_t>(ids.size()) == records,
      std::to_string(ids.size()) + " distinct of " + std::to_string(records));

  std::int64_t worker_asks = 0;
  for (const auto& w : report.workers) worker_asks += w.asks;
  add("worker logs cover every ask", worker_asks == records,
      std::to_string(worker_asks) + " asks, " + std::to_string(records) +
          " trial records");

  for (const auto& s : report.studies) {
    const std::string tag = " [" + s.name + "]";
    bool gap_free = true;
    for (std::size_t i = 0; i < s.trials.size(); ++i) {
      gap_free &= s.trials[i].index == static_cast<std::int64_t>(i);
    }
    add("gap-free indices" + tag, gap_free,
        std::to_string(s.trials.size()) + " trials");
    add("asks = closed" + tag, s.asks == s.completed + s.pruned + s.failed,
        std::to_string(s.asks) + " asks, " +
            std::to_string(s.completed + s.pruned + s.failed) + " closed");
    add("budget reached" + tag,
        s.completed + s.pruned + s.failed == report.config.n_trials,
        std::to_string(s.completed + s.pruned + s.failed) + " of " +
            std::to_string(report.config.n_trials));

    const auto summary = client.get("/api/studies/" + s.study_id);
    if (summary.status != 200) {
      add("server accounting" + tag, false,
          "GET study returned " + std::to_string(summary.status));
      continue;
    }
    const json j = summary.json();
    const json& c = j.at("counts");
    const bool counts_ok =
        c.at("completed").get<std::int64_t>() == s.completed &&
        c.at("pruned").get<std::int64_t>() == s.pruned &&
        c.at("failed").get<std::int64_t>() == s.failed &&
        c.at("running").get<std::int64_t>() == 0 &&
        j.at("n_trials").get<std::int64_t>() == s.asks;
    std::optional<double> server_best;
    if (!j.at("best_objective").is_null()) {
      server_best = j.at("best_objective").get<double>();
    }
    add("server accounting" + tag, counts_ok && server_best == s.best_objective,
        "server " + c.dump() + " best " + format_optional(server_best));

    const auto trials = client.get("/api/studies/" + s.study_id + "/trials");
    bool trials_ok = trials.status == 200;
    if (trials_ok) {
      const json body = trials.json();
      const json& list = body.at("trials");
      trials_ok = list.size() == s.trials.size();
      for (std::size_t i = 0; trials_ok && i < list.size(); ++i) {
        const auto& st = list[i];
        const auto& ct = s.trials[i];
        trials_ok = st.at("index").get<std::int64_t>() == ct.index &&
                    st.at("trial_id").get<std::string>() == ct.trial_id &&
                    st.at("state").get<std::string>() ==
                        trial_state_name(ct.state) &&
                    st.at("params") == ct.params &&
                    static_cast<std::int64_t>(st.at("intermediates").size()) ==
                        ct.steps;
        if (trials_ok && ct.objective) {
          trials_ok = st.at("objective").get<double>() == *ct.objective;
        }
      }
    }
    add("server trial log" + tag, trials_ok,
        "status " + std::to_string(trials.status));
  }
}

}  // namespace

std::string study_request(const CampaignConfig& config, int study_index) {
  return canonical_text(study_definition(config, study_index));
}

CampaignReport run_campaign(const CampaignConfig& config) {
  if (config.n_workers < 1) {
    throw std::invalid_argument("n_workers must be at least 1");
  }
  if (config.n_studies < 1 || config.n_studies > SharedState::kMaxStudies) {
    throw std::invalid_argument("n_studies must be in [1, 256]");
  }
  CampaignReport report;
  report.config = config;
  if (config.n_trials <= 0) return report;

  void* mem = ::mmap(nullptr, sizeof(SharedState), PROT_READ | PROT_WRITE,
                     MAP_SHARED | MAP_ANONYMOUS, -1, 0);
  if (mem == MAP_FAILED) throw std::runtime_error("mmap failed");
  auto* shared = new (mem) SharedState();
  for (auto& r : shared->reserved) r.store(0);
  shared->abort.store(0);

  const auto start = Steady::now();
  std::vector<WorkerResult> results;
  try {
    results = config.processes ? run_processes(config, *shared, start)
                               : run_threads(config, *shared, start);
  } catch (...) {
    ::munmap(mem, sizeof(SharedState));
    throw;
  }
  ::munmap(mem, sizeof(SharedState));
  report.wall_seconds =
      std::chrono::duration<double>(Steady::now() - start).count();

  for (const auto& r : results) {
    if (r.error) throw CampaignError(*r.error, r.error_message);
  }

  report.studies.resize(static_cast<std::size_t>(config.n_studies));
  for (int s = 0; s < config.n_studies; ++s) {
    auto& st = report.studies[static_cast<std::size_t>(s)];
    st.name = study_definition(config, s).name;
    st.sampler_seed = study_seed(config, s);
  }
  for (auto& r : results) {
    report.workers.push_back(r.report);
    for (const auto& [s, id] : r.study_ids) {
      report.studies[static_cast<std::size_t>(s)].study_id = id;
    }
    for (const auto& [s, t] : r.last_close) {
      auto& wall = report.studies[static_cast<std::size_t>(s)].wall_seconds;
      wall = std::max(wall, t);
    }
    for (auto& [s, t] : r.trials) {
      auto& st = report.studies[static_cast<std::size_t>(s)];
      ++st.asks;
      st.total_steps += t.steps;
      switch (t.state) {
        case TrialState::kCompleted:
          ++st.completed;
          if (!st.best_objective || *t.objective < *st.best_objective) {
            st.best_objective = t.objective;
          }
          break;
        case TrialState::kPruned: ++st.pruned; break;
        case TrialState::kFailed: ++st.failed; break;
        case TrialState::kRunning: break;
      }
      st.trials.push_back(std::move(t));
    }
  }
  for (auto& st : report.studies) {
    std::sort(st.trials.begin(), st.trials.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
  }

  ProtocolClient client(config.server_url, config.token);
  reconcile(report, client);
  return report;
}

bool CampaignReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.ok; });
}

std::int64_t CampaignReport::total_steps() const {
  std::int64_t n = 0;
  for (const auto& s : studies) n += s.total_steps;
  return n;
}

nlohmann::json CampaignReport::to_json() const {
  const auto& c = config;
  json studies_json = json::array();
  for (const auto& s : studies) {
    json trials = json::array();
    for (const auto& t : s.trials) trials.push_back(trial_to_json(t));
    studies_json.push_back(
        {{"study_id", s.study_id},
         {"name", s.name},
         {"sampler_seed", s.sampler_seed},
         {"asks", s.asks},
         {"completed", s.completed},
         {"pruned", s.pruned},
         {"failed", s.failed},
         {"best_objective",
          s.best_objective ? json(*s.best_objective) : json(nullptr)},
         {"wall_seconds", s.wall_seconds},
         {"total_steps", s.total_steps},
         {"trials", trials}});
  }
  json workers_json = json::array();
  for (const auto& w : workers) {
    workers_json.push_back({{"worker", w.worker},
                            {"asks", w.asks},
                            {"completed", w.completed},
                            {"pruned", w.pruned},
                            {"failed", w.failed},
                            {"steps", w.steps}});
  }
  json checks_json = json::array();
  for (const auto& k : checks) {
    checks_json.push_back(
        {{"name", k.name}, {"ok", k.ok}, {"detail", k.detail}});
  }
  return {
      {"config",
       {{"server", c.server_url},
        {"objective", BenchObjective(c.objective).name()},
        {"workers", c.n_workers},
        {"studies", c.n_studies},
        {"trials_per_study", c.n_trials},
        {"sampler", sampler_kind_name(c.sampler.kind)},
        {"pruner", pruner_kind_name(c.pruner.kind)},
        {"steps", c.steps},
        {"fail_rate", c.fail_rate},
        {"seed", c.seed},
        {"processes", c.processes}}},
      {"wall_seconds", wall_seconds},
      {"total_steps", total_steps()},
      {"studies", studies_json},
      {"workers", workers_json},
      {"checks", checks_json},
      {"ok", ok()},
  };
}

std::string CampaignReport::table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %6s %9s %6s %6s %12s %8s %9s\n",
                "study", "asks", "completed", "pruned", "failed", "best",
                "steps", "wall_s");
  out << line;
  for (const auto& s : studies) {
    std::snprintf(line, sizeof(line),
                  "%-28s %6lld %9lld %6lld %6lld %12s %8lld %9.2f\n",
                  s.name.c_str(), static_cast<long long>(s.asks),
                  static_cast<long long>(s.completed),
                  static_cast<long long>(s.pruned),
                  static_cast<long long>(s.failed),
                  format_optional(s.best_objective).c_str(),
                  static_cast<long long>(s.total_steps), s.wall_seconds);
    out << line;
  }
  out << "\n";
  std::snprintf(line, sizeof(line), "%-8s %6s %9s %6s %6s %8s\n", "worker",
                "asks", "completed", "pruned", "failed", "steps");
  out << line;
  for (const auto& w : workers) {
    std::snprintf(line, sizeof(line), "%-8d %6lld %9lld %6lld %6lld %8lld\n",
                  w.worker, static_cast<long long>(w.asks),
                  static_cast<long long>(w.completed),
                  static_cast<long long>(w.pruned),
                  static_cast<long long>(w.failed),
                  static_cast<long long>(w.steps));
    out << line;
  }
  out << "\n";
  for (const auto& k : checks) {
    out << (k.ok ? "ok    " : "FAIL  ") << k.name << ": " << k.detail << "\n";
  }
  std::snprintf(line, sizeof(line), "\nwall %.2fs, %lld steps, %s\n",
                wall_seconds, static_cast<long long>(total_steps()),
                ok() ? "reconciled" : "NOT reconciled");
  out << line;
  return out.str();
}

}  // namespace hposerve::bench
