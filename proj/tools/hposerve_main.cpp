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
// hposerve: the optimization server and its offline token console.

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "hposerve/http_server.hpp"
#include "hposerve/service.hpp"
#include "hposerve/sqlite_storage.hpp"

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

/// "host:port" or ":port" or "port".
bool split_listen(const std::string& listen, std::string& host, int& port) {
  const auto colon = listen.rfind(':');
  std::string port_text = listen;
  if (colon != std::string::npos) {
    if (colon > 0) host = listen.substr(0, colon);
    port_text = listen.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    return used == port_text.size() && port >= 0 && port <= 65535;
  } catch (const std::exception&) {
    return false;
  }
}

int serve(const std::string& listen, const std::string& data_dir,
          const std::string& admin_credential, int threads,
          const std::string& static_dir) {
  hposerve::ServerOptions server_options;
  if (!split_listen(listen, server_options.host, server_options.port)) {
    std::cerr << "invalid listen address: " << listen << "\n";
    return 2;
  }
  server_options.threads = threads;
  if (!static_dir.empty()) server_options.static_dir = static_dir;

  // Handle termination signals on a dedicated thread.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  hposerve::SqliteStorage storage(data_dir);
  hposerve::ServiceOptions service_options;
  service_options.admin_credential = admin_credential;
  hposerve::ApiService service(storage, service_options);
  hposerve::HttpServer server(service, server_options);
  const int port = server.bind();

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {}, shutting down", sig);
    server.stop();
  });
  waiter.detach();

  spdlog::info("data directory {}", storage.database_path().string());
  if (admin_credential.empty()) {
    spdlog::warn("no admin credential set; console endpoints are disabled");
  }
  std::cout << "listening on http://" << server_options.host << ":" << port
            << std::endl;
  server.serve();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hposerve: hyperparameter optimization server"};
  app.require_subcommand(1);

  std::string log_level = env_or("HPOSERVE_LOG_LEVEL", "info");
  std::string data_dir = env_or("HPOSERVE_DATA_DIR", "hposerve-data");
  app.add_option("--log-level", log_level,
                 "trace, debug, info, warn, error or off [HPOSERVE_LOG_LEVEL]");
  app.add_option("--data-dir", data_dir, "data directory [HPOSERVE_DATA_DIR]");

  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP server");
  std::string listen = env_or("HPOSERVE_LISTEN", "127.0.0.1:8080");
  std::string admin = env_or("HPOSERVE_ADMIN_CREDENTIAL", "");
  int threads = 64;
  std::string static_dir;
  serve_cmd->add_option("--listen", listen,
                        "host:port, port 0 picks one [HPOSERVE_LISTEN]");
  serve_cmd->add_option("--admin-credential", admin,
                        "console credential [HPOSERVE_ADMIN_CREDENTIAL]");
  serve_cmd->add_option("--threads", threads, "request worker threads")
      ->check(CLI::Range(1, 4096));
  serve_cmd->add_option("--static-dir", static_dir,
                        "serve dashboard assets from this directory");

  auto* token_cmd = app.add_subcommand("token", "manage worker tokens offline");
  token_cmd->require_subcommand(1);
  auto* issue_cmd = token_cmd->add_subcommand("issue", "issue a token");
  std::string owner;
  double validity_seconds = 86400.0;
  issue_cmd->add_option("--owner", owner, "principal owning the studies")
      ->required();
  issue_cmd->add_option("--validity-seconds", validity_seconds)
      ->check(CLI::PositiveNumber);
  auto* revoke_cmd = token_cmd->add_subcommand("revoke", "revoke a token");
  std::string token_id;
  revoke_cmd->add_option("token_id", token_id)->required();
  auto* list_cmd = token_cmd->add_subcommand("list", "list tokens");

  CLI11_PARSE(app, argc, argv);

  const auto level = spdlog::level::from_str(log_level);
  spdlog::set_level(level);
  spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");

  try {
    if (*serve_cmd) {
      return serve(listen, data_dir, admin, threads, static_dir);
    }
    hposerve::SqliteStorage storage(data_dir);
    if (*issue_cmd) {
      const auto issued = storage.issue_token(
          owner, std::chrono::milliseconds(
                     static_cast<std::int64_t>(validity_seconds * 1000.0)));
      std::cout << issued.credential << "\n";
    } else if (*revoke_cmd) {
      storage.revoke_token(token_id);
      std::cout << "revoked " << token_id << "\n";
    } else if (*list_cmd) {
      for (const auto& t : storage.list_tokens()) {
        std::cout << t.token_id << " " << t.owner << " expires "
                  << hposerve::format_timestamp(t.expires_at())
                  << (t.revoked ? " revoked" : "") << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
