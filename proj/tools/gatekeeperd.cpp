// SPDX-License-Identifier: Apache-2.0
// Organization server: REST API, event feed and optional dashboard files.

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "gatekeeper/feed.hpp"
#include "gatekeeper/http_api.hpp"
#include "gatekeeper/service.hpp"
#include "gatekeeper/storage.hpp"

using namespace gatekeeper;

int main(int argc, char** argv) {
  CLI::App app{"gatekeeperd - NFC access control server"};

  std::string listen = "127.0.0.1:8080";
  std::string data_dir = "gatekeeper-data";
  std::string admin_token;
  std::string app_id{service::kDefaultAndroidAppId};
  std::string link{service::kDefaultUniversalLink};
  std::string static_dir;
  bool test_mode = false;
  int heartbeat_seconds = 15;
  std::size_t feed_buffer = feed::kDefaultBufferSize;

  app.add_option("--listen", listen, "host:port to bind")->envname("GATEKEEPER_LISTEN")->capture_default_str();
  app.add_option("--data-dir", data_dir, "Data directory")->envname("GATEKEEPER_DATA_DIR")->capture_default_str();
  app.add_option("--admin-token", admin_token, "Admin bearer token (default: generated and persisted)")
      ->envname("GATEKEEPER_ADMIN_TOKEN");
  app.add_option("--app-id", app_id, "Android package written to tags")->capture_default_str();
  app.add_option("--universal-link", link, "Link written to tags")->capture_default_str();
  app.add_flag("--test-mode", test_mode, "Honor the X-Gatekeeper-Time header")->envname("GATEKEEPER_TEST_MODE");
  app.add_option("--static-dir", static_dir, "Serve this directory at /")->check(CLI::ExistingDirectory);
  app.add_option("--heartbeat-seconds", heartbeat_seconds, "Feed heartbeat interval")
      ->check(CLI::Range(1, 3600))
      ->capture_default_str();
  app.add_option("--feed-buffer", feed_buffer, "Per-subscriber event buffer")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20))
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "--listen must be host:port\n";
    return 1;
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "bad port in --listen\n";
    return 1;
  }

  // Block termination signals so every thread inherits the mask; main waits
  // for them with sigwait.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    storage::Store store(data_dir);
    feed::EventFeed events(feed_buffer);
    service::Config config;
    config.android_app_id = app_id;
    config.universal_link = link;
    if (!admin_token.empty()) config.admin_token = admin_token;
    config.test_mode = test_mode;
    service::AccessService svc(store, events, config);

    http::ServerOptions options;
    options.heartbeat = std::chrono::seconds(heartbeat_seconds);
    if (!static_dir.empty()) options.static_dir = static_dir;
    http::ApiServer server(svc, options);

    int bound = server.start(host, port);
    if (bound < 0) {
      std::cerr << "cannot bind " << listen << '\n';
      return 1;
    }
    std::cout << "listening on http://" << host << ':' << bound << '\n'
              << "data dir: " << store.data_dir().string() << '\n'
              << "server guid: " << to_hex(store.credentials().server_guid) << '\n'
              << "admin token: " << (config.admin_token ? *config.admin_token : store.credentials().admin_token)
              << '\n';
    if (test_mode) std::cout << "test mode: virtual time header honored\n";
    std::cout.flush();

    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "shutting down\n";
    events.shutdown();
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "gatekeeperd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
