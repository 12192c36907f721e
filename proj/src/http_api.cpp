// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/http_api.hpp"

#include <atomic>
#include <charconv>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gatekeeper/wire.hpp"

namespace gatekeeper::http {

using nlohmann::json;
using service::Errc;

namespace {

constexpr auto kFeedPollInterval = std::chrono::milliseconds(200);

int status_for(Errc code) {
  switch (code) {
    case Errc::unauthorized: return 401;
    case Errc::time_override_refused: return 403;
    case Errc::unknown_user:
    case Errc::unknown_gate:
    case Errc::not_found: return 404;
    case Errc::duplicate_name: return 409;
    case Errc::too_large: return 413;
    case Errc::missing_name:
    case Errc::invalid_photo:
    case Errc::bad_time_range:
    case Errc::missing_expiration:
    case Errc::bad_request: return 400;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message) {
  send_json(res, status_for(code), {{"error", service::error_id(code)}, {"message", message}});
}

[[noreturn]] void bad_request(const std::string& message) { throw service::Error(Errc::bad_request, message); }

std::string bearer_token(const httplib::Request& req) {
  const auto& auth = req.get_header_value("Authorization");
  constexpr std::string_view kPrefix = "Bearer ";
  if (auth.size() > kPrefix.size() && std::string_view(auth).substr(0, kPrefix.size()) == kPrefix)
    return auth.substr(kPrefix.size());
  return {};
}

template <typename Int>
Int parse_int(const std::string& text, const char* what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    bad_request(std::string(what) + " must be a non-negative integer");
  return value;
}

Timestamp parse_time(const std::string& text, const char* what) {
  auto t = parse_utc(text);
  if (!t) bad_request(std::string(what) + " must be an ISO-8601 UTC time or Unix seconds");
  return *t;
}

bool parse_flag(const std::string& text) {
  if (text.empty() || text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  bad_request("boolean parameter must be true or false");
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception&) {
    bad_request("request body must be JSON");
  }
}

std::optional<std::string> form_field(const httplib::Request& req, const char* name) {
  if (!req.has_file(name)) return std::nullopt;
  return req.get_file_value(name).content;
}

/// Feed/event filter from query parameters (gate, user, denied_only, from, to).
EventFilter filter_from_query(const httplib::Request& req) {
  EventFilter f;
  if (req.has_param("from")) f.time_from = parse_time(req.get_param_value("from"), "from");
  if (req.has_param("to")) f.time_to = parse_time(req.get_param_value("to"), "to");
  if (req.has_param("gate")) f.gate_id = parse_int<policy::GateId>(req.get_param_value("gate"), "gate");
  if (req.has_param("user")) f.user_id = policy::UserId{req.get_param_value("user")};
  if (req.has_param("denied_only")) f.denied_only = parse_flag(req.get_param_value("denied_only"));
  return f;
}

}  // namespace

struct ApiServer::Impl {
  Impl(service::AccessService& svc, ServerOptions opts) : service(svc), options(std::move(opts)) {}

  service::AccessService& service;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};

  std::optional<Timestamp> time_override(const httplib::Request& req) const {
    if (!req.has_header(kTimeOverrideHeader)) return std::nullopt;
    return parse_time(req.get_header_value(kTimeOverrideHeader), kTimeOverrideHeader);
  }

  Timestamp decision_time(const httplib::Request& req) const {
    if (service.config().test_mode)
      if (auto t = time_override(req)) return *t;
    return now_utc();
  }

  /// Wraps a handler so service errors become JSON error responses.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const service::Error& e) {
        send_error(res, e.code(), e.detail().empty() ? std::string(e.what()) : e.detail());
      } catch (const json::exception& e) {
        send_error(res, Errc::bad_request, e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, Errc::bad_request, e.what());
      }
    };
  }

  void install_routes();
  void install_feed();
};

void ApiServer::Impl::install_routes() {
  server.Post("/api/gates", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body = parse_body(req);
    auto reg = service.register_gate(bearer_token(req), body.value("name", ""), body.value("location", ""));
    send_json(res, 201, wire::to_json(reg));
  }));

  server.Get("/api/gates", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json gates = json::array();
    for (const auto& g : service.list_gates(bearer_token(req))) gates.push_back(wire::to_json(g));
    send_json(res, 200, {{"gates", gates}});
  }));

  server.Post("/api/users", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) bad_request("expected multipart/form-data");
    auto photo = form_field(req, "photo").value_or("");
    auto reg = service.register_user(bearer_token(req), form_field(req, "first_name").value_or(""),
                                     form_field(req, "last_name").value_or(""), to_bytes(photo));
    send_json(res, 201, wire::to_json(reg));
  }));

  server.Put(R"(/api/users/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) bad_request("expected multipart/form-data");
    std::optional<Bytes> photo;
    if (auto p = form_field(req, "photo")) photo = to_bytes(*p);
    auto user = service.update_user(bearer_token(req), policy::UserId{req.matches[1]},
                                    form_field(req, "first_name"), form_field(req, "last_name"), std::move(photo));
    send_json(res, 200, {{"user", wire::to_json(user)}});
  }));

  server.Get("/api/users", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json users = json::array();
    for (const auto& u : service.list_users(bearer_token(req))) users.push_back(wire::to_json(u));
    send_json(res, 200, {{"users", users}});
  }));

  server.Post("/api/checkin", guarded([this](const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data()) bad_request("expected multipart/form-data");
    service::CheckinRequest in;
    in.device_token = bearer_token(req);
    auto guid = form_field(req, "server_guid");
    auto gate = form_field(req, "gate_id");
    if (!guid || !gate) bad_request("server_guid and gate_id are required");
    in.server_guid = wire::guid_from_hex(*guid);
    in.gate_id = parse_int<std::uint32_t>(*gate, "gate_id");
    in.photo = to_bytes(form_field(req, "photo").value_or(""));
    if (auto t = form_field(req, "client_time"); t && !t->empty()) in.client_time = parse_time(*t, "client_time");
    in.time_override = time_override(req);
    send_json(res, 200, wire::to_json(service.check_in(in)));
  }));

  server.Get("/api/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
    Page page;
    if (req.has_param("page")) page.number = parse_int<std::size_t>(req.get_param_value("page"), "page");
    if (req.has_param("page_size"))
      page.size = parse_int<std::size_t>(req.get_param_value("page_size"), "page_size");
    auto result = service.query_events(bearer_token(req), filter_from_query(req), page);
    send_json(res, 200,
              {{"events", result.events}, {"total", result.total}, {"page", page.number}, {"page_size", page.size}});
  }));

  server.Get(R"(/api/gates/(\d+)/policies)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto gate = parse_int<policy::GateId>(req.matches[1], "gate id");
    const auto now = decision_time(req);
    json rows = json::array();
    for (const auto& row : service.list_policies(bearer_token(req), gate)) {
      json j = wire::to_json(row.policy);
      j["user"] = wire::to_json(row.user);
      j["status"] = wire::policy_status(row.policy, now);
      rows.push_back(std::move(j));
    }
    send_json(res, 200, {{"gate_id", gate}, {"policies", rows}});
  }));

  server.Put(R"(/api/gates/(\d+)/policies/([^/]+))",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
               const auto gate = parse_int<policy::GateId>(req.matches[1], "gate id");
               json body = parse_body(req);
               std::optional<Timestamp> expires;
               if (body.contains("expires_at") && !body["expires_at"].is_null())
                 expires = parse_time(body["expires_at"].get<std::string>(), "expires_at");
               auto p = service.upsert_policy(bearer_token(req), policy::UserId{req.matches[2]}, gate,
                                              body.value("enabled", true), expires);
               json j = wire::to_json(p);
               j["status"] = wire::policy_status(p, decision_time(req));
               send_json(res, 200, j);
             }));

  server.Get(R"(/api/photos/([0-9a-f]{64}))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto blob = service.get_photo(bearer_token(req), req.matches[1].str());
    res.status = 200;
    res.set_content(std::string(blob.bytes.begin(), blob.bytes.end()), std::string(photo::content_type(blob.media_type)));
  }));

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });
}

void ApiServer::Impl::install_feed() {
  server.Get("/api/feed", guarded([this](const httplib::Request& req, httplib::Response& res) {
    EventFilter filter = filter_from_query(req);
    filter.time_from.reset();
    filter.time_to.reset();
    auto sub = service.subscribe(bearer_token(req), std::move(filter));

    struct StreamState {
      bool greeted = false;
      std::chrono::steady_clock::time_point last_frame = std::chrono::steady_clock::now();
    };
    auto state = std::make_shared<StreamState>();

    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "application/x-ndjson",
        [this, sub, state](std::size_t, httplib::DataSink& sink) {
          auto write_frame = [&](const json& frame) {
            std::string line = frame.dump() + "\n";
            state->last_frame = std::chrono::steady_clock::now();
            return sink.write(line.data(), line.size());
          };
          // An immediate heartbeat tells the client the subscription is live.
          if (!state->greeted) {
            state->greeted = true;
            return write_frame(wire::heartbeat_frame(now_utc()));
          }
          if (stopping) {
            sink.done();
            return true;
          }
          auto wait = std::min<std::chrono::milliseconds>(kFeedPollInterval, options.heartbeat);
          auto next = sub->wait_next(wait);
          switch (next.status) {
            case feed::Subscription::Status::event:
              return write_frame(wire::event_frame(*next.event));
            case feed::Subscription::Status::overflow:
              write_frame(wire::overflow_frame());
              sink.done();
              return true;
            case feed::Subscription::Status::closed:
              sink.done();
              return true;
            case feed::Subscription::Status::timeout:
              if (std::chrono::steady_clock::now() - state->last_frame >= options.heartbeat)
                return write_frame(wire::heartbeat_frame(now_utc()));
              return sink.is_writable();
          }
          return false;
        },
        [this, id = sub->id()](bool) { service.unsubscribe(id); });
  }));
}

ApiServer::ApiServer(service::AccessService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto threads = impl_->options.worker_threads;
  impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  impl_->server.set_payload_max_length(impl_->options.max_request_bytes);
  impl_->server.set_keep_alive_timeout(1);
  impl_->server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send_json(res, 500, {{"error", "internal"}, {"message", message}});
  });
  impl_->install_routes();
  impl_->install_feed();
  if (impl_->options.static_dir) impl_->server.set_mount_point("/", impl_->options.static_dir->string());
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->server.listen_after_bind(); }

int ApiServer::start(const std::string& host, int port) {
  int bound = bind(host, port);
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace gatekeeper::http
