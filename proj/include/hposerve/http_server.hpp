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
#include <optional>
#include <string>

#include "hposerve/service.hpp"

namespace hposerve {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int threads = 64;
  std::optional<std::filesystem::path> static_dir;
};

/// HTTP/1.1 front end for ApiService.
class HttpServer {
 public:
  HttpServer(ApiService& service, ServerOptions options);
  ~HttpServer();

  /// Binds the listening socket; returns the bound port. Throws on failure.
  int bind();
  /// Serves until stop(); call bind() first.
  void serve();
  void stop();
  /// Blocks until the server accepts connections (after bind + serve).
  void wait_until_ready();

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hposerve
