// SPDX-License-Identifier: Apache-2.0
#pragma once

// In-process server and temp-dir helpers shared by unit and acceptance tests.

#include <atomic>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "gatekeeper/client.hpp"
#include "gatekeeper/feed.hpp"
#include "gatekeeper/http_api.hpp"
#include "gatekeeper/service.hpp"
#include "gatekeeper/simulator.hpp"
#include "gatekeeper/storage.hpp"

namespace gktest {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& name) { return fs::path(GK_FIXTURES_DIR) / "photos" / name; }
inline gatekeeper::Bytes photo(const std::string& name) { return gatekeeper::sim::read_file(fixture(name)); }
inline fs::path scenario_path(const std::string& name) { return fs::path(GK_SCENARIOS_DIR) / name; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("gktest-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

/// Store + feed + service + HTTP server on a free loopback port.
class TestServer {
 public:
  explicit TestServer(bool test_mode = true, gatekeeper::http::ServerOptions options = {},
                      std::optional<fs::path> data_dir = std::nullopt) {
    dir_ = data_dir ? *data_dir : tmp_.path() / "data";
    store_ = std::make_unique<gatekeeper::storage::Store>(dir_);
    feed_ = std::make_unique<gatekeeper::feed::EventFeed>();
    gatekeeper::service::Config config;
    config.test_mode = test_mode;
    service_ = std::make_unique<gatekeeper::service::AccessService>(*store_, *feed_, config);
    server_ = std::make_unique<gatekeeper::http::ApiServer>(*service_, options);
    port_ = server_->start("127.0.0.1", 0);
  }
  ~TestServer() {
    feed_->shutdown();
    server_->stop();
  }

  int port() const { return port_; }
  const std::string& admin_token() const { return store_->credentials().admin_token; }
  gatekeeper::client::ApiClient client() const { return {"127.0.0.1", port_, admin_token()}; }
  gatekeeper::storage::Store& store() { return *store_; }
  gatekeeper::service::AccessService& service() { return *service_; }
  gatekeeper::feed::EventFeed& feed() { return *feed_; }
  const fs::path& data_dir() const { return dir_; }

 private:
  TempDir tmp_;
  fs::path dir_;
  std::unique_ptr<gatekeeper::storage::Store> store_;
  std::unique_ptr<gatekeeper::feed::EventFeed> feed_;
  std::unique_ptr<gatekeeper::service::AccessService> service_;
  std::unique_ptr<gatekeeper::http::ApiServer> server_;
  int port_ = -1;
};

}  // namespace gktest
