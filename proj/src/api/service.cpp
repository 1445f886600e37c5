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
#include "hposerve/service.hpp"

#include <cmath>
#include <ctime>
#include <set>

#include <nlohmann/json.hpp>

#include "hposerve/canonical.hpp"
#include "hposerve/crypto.hpp"
#include "hposerve/pruner.hpp"
#include "hposerve/random_sampling.hpp"
#include "hposerve/sampler.hpp"

namespace hposerve {

using nlohmann::json;

std::string format_timestamp(TimePoint t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      t.time_since_epoch())
                      .count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms % 1000));
  return buf;
}

namespace {

HttpResponse json_response(int status, const json& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

HttpResponse error_response(int status, std::string_view code,
                            const std::string& message) {
  return json_response(status, {{"error", code}, {"message", message}});
}

HttpResponse validation_response(const ValidationError& e) {
  json violations = json::array();
  for (const auto& v : e.violations()) {
    violations.push_back(
        {{"code", v.code}, {"param", v.param}, {"message", v.message}});
  }
  return json_response(
      422, {{"error", "validation_failed"}, {"violations", violations}});
}

int status_for(Errc code) {
  switch (code) {
    case Errc::kValidation:
    case Errc::kNonMonotonicStep:
    case Errc::kNonFiniteValue:
    case Errc::kParamsMismatch:
    case Errc::kValueOutOfRange:
    case Errc::kIncompatibleHistory:
    case Errc::kEmptyHistory:
      return 422;
    case Errc::kUnknownStudy:
    case Errc::kUnknownTrial:
    case Errc::kUnknownToken:
      return 404;
    case Errc::kIllegalTransition:
    case Errc::kTrialNotRunning:
    case Errc::kGridExhausted:
      return 409;
    case Errc::kStorageUnavailable:
      return 503;
  }
  return 500;
}

/// Runs `fn`, mapping library errors to their HTTP status.
template <typename Fn>
HttpResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    return validation_response(e);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), errc_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ValidationError({{"Schema", "", "body is not valid JSON"}});
  }
  if (!j.is_object()) {
    throw ValidationError({{"Schema", "", "body must be a JSON object"}});
  }
  return j;
}

void reject_unknown_fields(const json& j, const std::set<std::string>& allowed) {
  std::vector<Violation> v;
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) v.push_back({"Schema", key, "unknown field"});
  }
  if (!v.empty()) throw ValidationError(std::move(v));
}

std::string required_string(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ValidationError({{"Schema", key, "expected a string"}});
  }
  return it->get<std::string>();
}

double required_finite(const json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ValidationError({{"Schema", key, "expected a number"}});
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) {
    throw Error(Errc::kNonFiniteValue, key + " must be finite");
  }
  return v;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json points_json(const std::vector<Intermediate>& intermediates) {
  json points = json::array();
  for (const auto& m : intermediates) points.push_back({m.step, m.value});
  return points;
}

json summary_json(const StudySummary& s) {
  return {
      {"study_id", s.study.study_id},
      {"name", s.study.name},
      {"owner", s.study.owner},
      {"fingerprint", s.study.fingerprint},
      {"created_at", format_timestamp(s.study.created_at)},
      {"direction", direction_name(s.study.properties.direction)},
      {"n_trials", s.study.trial_counter},
      {"counts",
       {{"running", s.counts.running},
        {"completed", s.counts.completed},
        {"pruned", s.counts.pruned},
        {"failed", s.counts.failed}}},
      {"best_objective", optional_number(s.best_objective)},
  };
}

json trial_json(const Trial& t) {
  return {
      {"trial_id", t.trial_id},
      {"index", t.index},
      {"state", trial_state_name(t.state)},
      {"params", assignment_to_json(t.params)},
      {"objective", optional_number(t.objective)},
      {"opened_at", format_timestamp(t.opened_at)},
      {"closed_at",
       t.closed_at ? json(format_timestamp(*t.closed_at)) : json(nullptr)},
      {"intermediates", points_json(t.intermediates)},
  };
}

json token_json(const TokenRecord& t) {
  return {
      {"token_id", t.token_id},
      {"owner", t.owner},
      {"issued_at", format_timestamp(t.issued_at)},
      {"expires_at", format_timestamp(t.expires_at())},
      {"validity_seconds",
       static_cast<double>(t.validity.count()) / 1000.0},
      {"revoked", t.revoked},
  };
}

std::string cookie_value(std::string_view cookie, std::string_view name) {
  std::size_t pos = 0;
  while (pos < cookie.size()) {
    auto end = cookie.find(';', pos);
    if (end == std::string_view::npos) end = cookie.size();
    auto part = cookie.substr(pos, end - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    if (part.size() > name.size() && part.substr(0, name.size()) == name &&
        part[name.size()] == '=') {
      return std::string(part.substr(name.size() + 1));
    }
    pos = end + 1;
  }
  return {};
}

bool same_secret(std::string_view a, std::string_view b) {
  const auto ha = crypto::sha256(a);
  const auto hb = crypto::sha256(b);
  return crypto::constant_time_equal(ha, hb);
}

}  // namespace

ApiService::ApiService(Storage& storage, ServiceOptions options)
    : storage_(storage), options_(std::move(options)) {}

TimePoint ApiService::now() const {
  return options_.clock ? options_.clock() : std::chrono::system_clock::now();
}

HttpResponse ApiService::unauthorized() {
  return json_response(401, {{"error", "unauthorized"}});
}

std::optional<std::string> ApiService::authenticate_worker(
    std::string_view token) {
  auto result = storage_.authenticate(token);
  return result.owner;
}

HttpResponse ApiService::ask(std::string_view token, std::string_view body) {
  return guarded([&]() -> HttpResponse {
    const auto owner = authenticate_worker(token);
    if (!owner) return unauthorized();
    const auto definition = parse_definition(parse_body(body));
    const auto [study, created] =
        storage_.create_or_attach_study(*owner, definition);

    Trial trial;
    {
      auto lock = storage_.locks().lock(study.study_id);
      const auto history = storage_.observation_history(study.study_id);
      const auto n_taken = storage_.get_study(study.study_id).trial_counter;
      const auto& sampler = study.properties.sampler;
      const auto params =
          suggest(study.space, history, sampler, n_taken,
                  mix_seed(sampler.seed, static_cast<std::uint64_t>(n_taken)));
      trial = storage_.open_trial(study.study_id, params);
    }
    auto r = json_response(200, {{"study_id", study.study_id},
                                 {"trial_id", trial.trial_id},
                                 {"trial_index", trial.index},
                                 {"params", assignment_to_json(trial.params)}});
    r.study_id = study.study_id;
    r.trial_id = trial.trial_id;
    return r;
  });
}

HttpResponse ApiService::tell(std::string_view token, std::string_view body) {
  return guarded([&]() -> HttpResponse {
    const auto owner = authenticate_worker(token);
    if (!owner) return unauthorized();
    const json j = parse_body(body);
    reject_unknown_fields(j, {"trial_id", "objective", "state"});
    const std::string trial_id = required_string(j, "trial_id");
    const bool has_objective = j.contains("objective");
    const bool has_state = j.contains("state");
    if (has_objective == has_state) {
      throw ValidationError({{"Schema", "objective",
                              "exactly one of objective or state is required"}});
    }
    Outcome outcome = Outcome::failed();
    if (has_objective) {
      outcome = Outcome::completed(required_finite(j, "objective"));
    } else if (required_string(j, "state") != "failed") {
      throw ValidationError({{"Schema", "state", "only 'failed' is accepted"}});
    }

    const Trial trial = storage_.get_trial(trial_id);
    const Study study = storage_.get_study(trial.study_id);
    if (study.owner != *owner) {
      throw Error(Errc::kUnknownTrial, "unknown trial " + trial_id);
    }
    std::optional<double> best;
    {
      auto lock = storage_.locks().lock(study.study_id);
      storage_.finalize_trial(trial_id, outcome);
    }
    if (auto b = storage_.best_trial(study.study_id)) best = b->objective;
    json out = {{"ok", true}};
    if (best) out["best_objective"] = *best;
    auto r = json_response(200, out);
    r.study_id = study.study_id;
    r.trial_id = trial_id;
    return r;
  });
}

HttpResponse ApiService::should_prune(std::string_view token,
                                      std::string_view body) {
  return guarded([&]() -> HttpResponse {
    const auto owner = authenticate_worker(token);
    if (!owner) return unauthorized();
    const json j = parse_body(body);
    reject_unknown_fields(j, {"trial_id", "step", "value"});
    const std::string trial_id = required_string(j, "trial_id");
    auto step_it = j.find("step");
    if (step_it == j.end() || !step_it->is_number_integer() ||
        step_it->get<std::int64_t>() < 0 ||
        (step_it->is_number_unsigned() &&
         step_it->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))) {
      throw ValidationError(
          {{"Schema", "step", "expected an integer >= 0"}});
    }
    const std::int64_t step = step_it->get<std::int64_t>();
    const double value = required_finite(j, "value");

    const Trial trial = storage_.get_trial(trial_id);
    const Study study = storage_.get_study(trial.study_id);
    if (study.owner != *owner) {
      throw Error(Errc::kUnknownTrial, "unknown trial " + trial_id);
    }
    bool prune = false;
    {
      auto lock = storage_.locks().lock(study.study_id);
      storage_.record_intermediate(trial_id, step, value);
      if (study.properties.pruner.kind != PrunerKind::kNone) {
        const auto trials = storage_.list_trials(study.study_id, std::nullopt);
        const auto snapshot = collect_snapshot(trials, step, trial_id);
        prune = hposerve::should_prune(value, snapshot,
                                       study.properties.direction,
                                       study.properties.pruner);
        if (prune) storage_.mark_pruned(trial_id);
      }
    }
    auto r = json_response(200, {{"prune", prune}});
    r.study_id = study.study_id;
    r.trial_id = trial_id;
    return r;
  });
}

std::optional<Principal> ApiService::resolve(std::string_view authorization,
                                             std::string_view cookie) {
  constexpr std::string_view kBearer = "Bearer ";
  if (authorization.substr(0, kBearer.size()) == kBearer) {
    const auto credential = authorization.substr(kBearer.size());
    if (!options_.admin_credential.empty() &&
        same_secret(credential, options_.admin_credential)) {
      return Principal{options_.admin_name, true};
    }
    if (auto owner = authenticate_worker(credential)) {
      return Principal{*owner, false};
    }
    return std::nullopt;
  }
  const auto session = cookie_value(cookie, ServiceOptions::kSessionCookie);
  if (!session.empty()) {
    std::lock_guard<std::mutex> lock(sessions_mutex_);
    auto it = sessions_.find(session);
    if (it != sessions_.end()) {
      if (now() < it->second) return Principal{options_.admin_name, true};
      sessions_.erase(it);
    }
  }
  return std::nullopt;
}

HttpResponse ApiService::login(std::string_view body) {
  return guarded([&]() -> HttpResponse {
    const json j = parse_body(body);
    reject_unknown_fields(j, {"credential"});
    const auto credential = required_string(j, "credential");
    if (options_.admin_credential.empty() ||
        !same_secret(credential, options_.admin_credential)) {
      return unauthorized();
    }
    const auto id = crypto::base64url(crypto::random_bytes(32));
    {
      std::lock_guard<std::mutex> lock(sessions_mutex_);
      sessions_[id] = now() + options_.session_ttl;
    }
    auto r = json_response(200, {{"ok", true}});
    r.headers.emplace_back(
        "Set-Cookie", std::string(ServiceOptions::kSessionCookie) + "=" + id +
                          "; Path=/; HttpOnly; SameSite=Strict; Max-Age=" +
                          std::to_string(options_.session_ttl.count()));
    return r;
  });
}

HttpResponse ApiService::logout(std::string_view cookie) {
  const auto session = cookie_value(cookie, ServiceOptions::kSessionCookie);
  {
    std::lock_guard<std::mutex> lock(sessions_mutex_);
    sessions_.erase(session);
  }
  auto r = json_response(200, {{"ok", true}});
  r.headers.emplace_back("Set-Cookie",
                         std::string(ServiceOptions::kSessionCookie) +
                             "=; Path=/; HttpOnly; SameSite=Strict; Max-Age=0");
  return r;
}

bool ApiService::can_read(const Principal& who, const std::string& study_id) {
  if (who.admin) return true;
  return storage_.get_study(study_id).owner == who.name;
}

HttpResponse ApiService::list_studies(const Principal& who) {
  return guarded([&]() -> HttpResponse {
    const auto studies = storage_.list_studies(
        who.admin ? std::nullopt : std::optional<std::string>(who.name));
    json out = json::array();
    for (const auto& s : studies) out.push_back(summary_json(s));
    return json_response(200, {{"studies", out}});
  });
}

HttpResponse ApiService::get_study(const Principal& who,
                                   const std::string& study_id) {
  return guarded([&]() -> HttpResponse {
    if (!can_read(who, study_id)) {
      throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
    }
    const auto summary = storage_.study_summary(study_id);
    json out = summary_json(summary);
    StudyDefinition def{summary.study.name, summary.study.space,
                        summary.study.properties};
    out["definition"] = json::parse(canonical_text(def));
    auto r = json_response(200, out);
    r.study_id = study_id;
    return r;
  });
}

HttpResponse ApiService::list_trials(const Principal& who,
                                     const std::string& study_id,
                                     const std::optional<std::string>& state) {
  return guarded([&]() -> HttpResponse {
    if (!can_read(who, study_id)) {
      throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
    }
    std::optional<TrialState> filter;
    if (state && !state->empty()) {
      filter = parse_trial_state(*state);
      if (!filter) {
        throw ValidationError({{"Schema", "state", "unknown trial state"}});
      }
    }
    json out = json::array();
    for (const auto& t : storage_.list_trials(study_id, filter)) {
      out.push_back(trial_json(t));
    }
    auto r = json_response(200, {{"study_id", study_id}, {"trials", out}});
    r.study_id = study_id;
    return r;
  });
}

HttpResponse ApiService::curves(const Principal& who,
                                const std::string& study_id) {
  return guarded([&]() -> HttpResponse {
    if (!can_read(who, study_id)) {
      throw Error(Errc::kUnknownStudy, "unknown study " + study_id);
    }
    const auto summary = storage_.study_summary(study_id);
    json series = json::array();
    for (const auto& t : storage_.list_trials(study_id, std::nullopt)) {
      series.push_back({{"trial_id", t.trial_id},
                        {"index", t.index},
                        {"state", trial_state_name(t.state)},
                        {"objective", optional_number(t.objective)},
                        {"points", points_json(t.intermediates)}});
    }
    auto r = json_response(
        200, {{"study_id", study_id},
              {"direction", direction_name(summary.study.properties.direction)},
              {"best_objective", optional_number(summary.best_objective)},
              {"series", series}});
    r.study_id = study_id;
    return r;
  });
}

HttpResponse ApiService::create_token(const Principal& who,
                                      std::string_view body) {
  return guarded([&]() -> HttpResponse {
    if (!who.admin) return unauthorized();
    const json j = parse_body(body);
    reject_unknown_fields(j, {"validity_seconds", "owner"});
    auto it = j.find("validity_seconds");
    if (it == j.end() || !it->is_number() || !(it->get<double>() > 0.0) ||
        !std::isfinite(it->get<double>())) {
      throw ValidationError(
          {{"Schema", "validity_seconds", "expected a number > 0"}});
    }
    const auto validity = std::chrono::milliseconds(
        static_cast<std::int64_t>(std::llround(it->get<double>() * 1000.0)));
    std::string owner = who.name;
    if (j.contains("owner")) {
      owner = required_string(j, "owner");
      if (owner.empty()) {
        throw ValidationError({{"Schema", "owner", "must be non-empty"}});
      }
    }
    const auto issued = storage_.issue_token(owner, validity);
    json out = token_json(issued.record);
    out["secret"] = issued.credential;
    return json_response(200, out);
  });
}

HttpResponse ApiService::list_tokens(const Principal& who) {
  return guarded([&]() -> HttpResponse {
    if (!who.admin) return unauthorized();
    json out = json::array();
    for (const auto& t : storage_.list_tokens()) out.push_back(token_json(t));
    return json_response(200, {{"tokens", out}});
  });
}

HttpResponse ApiService::revoke_token(const Principal& who,
                                      const std::string& token_id) {
  return guarded([&]() -> HttpResponse {
    if (!who.admin) return unauthorized();
    storage_.revoke_token(token_id);
    return json_response(200, {{"ok", true}, {"token_id", token_id}});
  });
}

}  // namespace hposerve
