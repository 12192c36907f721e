// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "gatekeeper/service.hpp"

namespace gatekeeper::http {

/// Request header carrying a virtual decision time (test mode only).
inline constexpr const char* kTimeOverrideHeader = "X-Gatekeeper-Time";

struct ServerOptions {
  std::chrono::milliseconds heartbeat{15'000};
  std::size_t worker_threads = 32;
  /// Photos are capped at 5 MB; the multipart envelope needs some slack.
  std::size_t max_request_bytes = 8 * 1024 * 1024;
  /// Optional directory served at / (the dashboard build).
  std::optional<std::filesystem::path> static_dir;
};

/// REST endpoints plus the NDJSON event feed at GET /api/feed.
class ApiServer {
 public:
  ApiServer(service::AccessService& service, ServerOptions options = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds to `port` (0 picks a free one). Returns the bound port or -1.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Requires a successful bind().
  bool listen();

  /// bind() + listen() on a background thread. Returns the port or -1.
  int start(const std::string& host = "127.0.0.1", int port = 0);

  /// Ends open feed streams, stops accepting, joins the background thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gatekeeper::http
