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
#include "hposerve/http_server.hpp"

#include <chrono>
#include <regex>
#include <stdexcept>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace hposerve {

namespace {

constexpr const char* kJson = "application/json";

/// Worker tokens travel in the path; keep them out of the logs.
std::string redacted_path(const std::string& path) {
  static const std::regex kWorker(R"(^(/api/(?:ask|tell|should_prune)/)[^/]+$)");
  return std::regex_replace(path, kWorker, "$1<token>");
}

void write(const HttpResponse& in, httplib::Response& out) {
  out.status = in.status;
  for (const auto& [k, v] : in.headers) out.set_header(k, v);
  out.set_content(in.body, kJson);
  // Picked up by the logger.
  if (!in.study_id.empty()) out.set_header("X-Study-Id", in.study_id);
  if (!in.trial_id.empty()) out.set_header("X-Trial-Id", in.trial_id);
}

}  // namespace

struct HttpServer::Impl {
  ApiService& service;
  ServerOptions options;
  httplib::Server server;
  int port = -1;

  Impl(ApiService& s, ServerOptions o) : service(s), options(std::move(o)) {}

  /// Wraps a read handler with principal resolution.
  template <typename Fn>
  httplib::Server::Handler authed(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      const auto who = service.resolve(req.get_header_value("Authorization"),
                                       req.get_header_value("Cookie"));
      write(who ? fn(*who, req) : ApiService::unauthorized(), res);
    };
  }

  void install_routes() {
    const int threads = std::max(1, options.threads);
    server.new_task_queue = [threads] {
      return new httplib::ThreadPool(static_cast<std::size_t>(threads));
    };
    server.set_tcp_nodelay(true);
    // SO_REUSEADDR only: a second server on a busy port must fail to bind
    // rather than silently share the listener.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.set_keep_alive_max_count(100000);
    server.set_keep_alive_timeout(30);
    server.set_payload_max_length(8 << 20);

    server.Post(R"(/api/ask/([^/]+))", [this](const auto& req, auto& res) {
      write(service.ask(req.matches[1].str(), req.body), res);
    });
    server.Post(R"(/api/tell/([^/]+))", [this](const auto& req, auto& res) {
      write(service.tell(req.matches[1].str(), req.body), res);
    });
    server.Post(R"(/api/should_prune/([^/]+))",
                [this](const auto& req, auto& res) {
                  write(service.should_prune(req.matches[1].str(), req.body),
                        res);
                });

    server.Get("/api/studies", authed([this](const Principal& who, const auto&) {
      return service.list_studies(who);
    }));
    server.Get(R"(/api/studies/([0-9a-f]+))",
               authed([this](const Principal& who, const auto& req) {
                 return service.get_study(who, req.matches[1]);
               }));
    server.Get(R"(/api/studies/([0-9a-f]+)/trials)",
               authed([this](const Principal& who, const auto& req) {
                 std::optional<std::string> state;
                 if (req.has_param("state")) {
                   state = req.get_param_value("state");
                 }
                 return service.list_trials(who, req.matches[1], state);
               }));
    server.Get(R"(/api/studies/([0-9a-f]+)/curves)",
               authed([this](const Principal& who, const auto& req) {
                 return service.curves(who, req.matches[1]);
               }));

    server.Post("/api/tokens", authed([this](const Principal& who,
                                             const auto& req) {
      return service.create_token(who, req.body);
    }));
    server.Get("/api/tokens", authed([this](const Principal& who, const auto&) {
      return service.list_tokens(who);
    }));
    server.Delete(R"(/api/tokens/([0-9a-f]+))",
                  authed([this](const Principal& who, const auto& req) {
                    return service.revoke_token(who, req.matches[1]);
                  }));

    server.Post("/api/login", [this](const auto& req, auto& res) {
      write(service.login(req.body), res);
    });
    server.Post("/api/logout", [this](const auto& req, auto& res) {
      write(service.logout(req.get_header_value("Cookie")), res);
    });
    server.Get("/healthz", [](const auto&, auto& res) {
      res.set_content(R"({"ok":true})", kJson);
    });

    if (options.static_dir) {
      if (!server.set_mount_point("/", options.static_dir->string())) {
        throw std::runtime_error("static directory not found: " +
                                 options.static_dir->string());
      }
    }

    server.set_exception_handler(
        [](const auto&, auto& res, std::exception_ptr ep) {
          std::string what = "internal error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            what = e.what();
          } catch (...) {
          }
          spdlog::error("unhandled: {}", what);
          res.status = 500;
          res.set_content(R"({"error":"internal"})", kJson);
        });

    server.set_logger([](const httplib::Request& req,
                         const httplib::Response& res) {
      if (!spdlog::should_log(spdlog::level::info)) return;
      spdlog::info("{} {} {} study={} trial={}", req.method,
                   redacted_path(req.path),
                   res.status, res.get_header_value("X-Study-Id"),
                   res.get_header_value("X-Trial-Id"));
    });
  }
};

HttpServer::HttpServer(ApiService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->install_routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& o = impl_->options;
  if (o.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(o.host);
  } else if (impl_->server.bind_to_port(o.host, o.port)) {
    impl_->port = o.port;
  } else {
    impl_->port = -1;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot bind " + o.host + ":" +
                             std::to_string(o.port));
  }
  return impl_->port;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

int HttpServer::port() const { return impl_->port; }

}  // namespace hposerve
