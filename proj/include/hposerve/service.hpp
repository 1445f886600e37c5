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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hposerve/storage.hpp"

namespace hposerve {

/// Transport-neutral response. Bodies are compact UTF-8 JSON with keys in
/// lexicographic order, so equal state yields byte-identical bodies.
struct HttpResponse {
  int status = 200;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  // for request logs only
  std::string study_id;
  std::string trial_id;
};

/// Who is calling a read or console endpoint. The admin sees every study;
/// a worker-token principal sees only studies it owns.
struct Principal {
  std::string name;
  bool admin = false;
};

struct ServiceOptions {
  static constexpr const char* kSessionCookie = "hposerve_session";

  /// Empty disables admin login and admin bearer auth.
  std::string admin_credential;
  std::string admin_name = "admin";
  std::chrono::seconds session_ttl{3600};
  Clock clock;
};

/// The ask / tell / should_prune protocol plus the read and token-console
/// APIs, on top of a Storage.
class ApiService {
 public:
  ApiService(Storage& storage, ServiceOptions options);

  HttpResponse ask(std::string_view token, std::string_view body);
  HttpResponse tell(std::string_view token, std::string_view body);
  HttpResponse should_prune(std::string_view token, std::string_view body);

  /// From the Authorization and Cookie request headers.
  std::optional<Principal> resolve(std::string_view authorization,
                                   std::string_view cookie);

  HttpResponse login(std::string_view body);
  HttpResponse logout(std::string_view cookie);

  HttpResponse list_studies(const Principal& who);
  HttpResponse get_study(const Principal& who, const std::string& study_id);
  HttpResponse list_trials(const Principal& who, const std::string& study_id,
                           const std::optional<std::string>& state);
  HttpResponse curves(const Principal& who, const std::string& study_id);

  HttpResponse create_token(const Principal& who, std::string_view body);
  HttpResponse list_tokens(const Principal& who);
  HttpResponse revoke_token(const Principal& who, const std::string& token_id);

  /// Same bytes for every authentication failure.
  static HttpResponse unauthorized();

 private:
  TimePoint now() const;
  std::optional<std::string> authenticate_worker(std::string_view token);
  bool can_read(const Principal& who, const std::string& study_id);

  Storage& storage_;
  ServiceOptions options_;

  std::mutex sessions_mutex_;
  std::map<std::string, TimePoint> sessions_;
};

/// RFC 3339 UTC with milliseconds, e.g. 2026-01-02T03:04:05.678Z
std::string format_timestamp(TimePoint t);

}  // namespace hposerve
