// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/client.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "gatekeeper/http_api.hpp"
#include "gatekeeper/photo.hpp"
#include "gatekeeper/wire.hpp"

namespace gatekeeper::client {

using nlohmann::json;

namespace {

httplib::Headers auth_headers(const std::string& token, std::optional<Timestamp> at = std::nullopt) {
  httplib::Headers h;
  if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
  if (at) h.emplace(http::kTimeOverrideHeader, format_utc(*at));
  return h;
}

httplib::Params filter_params(const EventFilter& f) {
  httplib::Params p;
  if (f.time_from) p.emplace("from", format_utc(*f.time_from));
  if (f.time_to) p.emplace("to", format_utc(*f.time_to));
  if (f.gate_id) p.emplace("gate", std::to_string(*f.gate_id));
  if (f.user_id) p.emplace("user", f.user_id->value);
  if (f.denied_only) p.emplace("denied_only", "true");
  return p;
}

[[noreturn]] void throw_api_error(int status, const std::string& body) {
  std::string id = "http_" + std::to_string(status);
  std::string message = body;
  try {
    auto j = json::parse(body);
    id = j.value("error", id);
    message = j.value("message", message);
  } catch (const json::exception&) {
  }
  throw ApiError(status, id, "HTTP " + std::to_string(status) + " " + id + ": " + message);
}

json expect_json(const httplib::Result& res, int expected_status) {
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != expected_status) throw_api_error(res->status, res->body);
  return json::parse(res->body);
}

httplib::MultipartFormData photo_part(ByteView photo) {
  auto type = photo::sniff(photo);
  const auto media = type.value_or(photo::MediaType::png);
  return {"photo", gatekeeper::to_string(photo), "photo." + std::string(photo::extension(media)),
          std::string(photo::content_type(media))};
}

PolicyRow row_from_json(const json& j) {
  PolicyRow row;
  row.policy = wire::policy_from_json(j);
  if (j.contains("user")) row.user = wire::user_from_json(j.at("user"));
  row.status = j.value("status", "");
  return row;
}

}  // namespace

struct ApiClient::Impl {
  std::string host;
  int port;
  std::string token;

  httplib::Client connect() const {
    httplib::Client cli(host, port);
    cli.set_connection_timeout(std::chrono::seconds(5));
    cli.set_read_timeout(std::chrono::seconds(60));
    cli.set_write_timeout(std::chrono::seconds(60));
    return cli;
  }
};

ApiClient::ApiClient(std::string host, int port, std::string admin_token)
    : impl_(std::make_unique<Impl>(Impl{std::move(host), port, std::move(admin_token)})) {}
ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

const std::string& ApiClient::host() const { return impl_->host; }
int ApiClient::port() const { return impl_->port; }
const std::string& ApiClient::admin_token() const { return impl_->token; }

service::GateRegistration ApiClient::register_gate(const std::string& name, const std::string& location) {
  auto cli = impl_->connect();
  json body = {{"name", name}, {"location", location}};
  auto res = cli.Post("/api/gates", auth_headers(impl_->token), body.dump(), "application/json");
  return wire::gate_registration_from_json(expect_json(res, 201));
}

std::vector<policy::Gate> ApiClient::list_gates() {
  auto cli = impl_->connect();
  auto j = expect_json(cli.Get("/api/gates", auth_headers(impl_->token)), 200);
  std::vector<policy::Gate> out;
  for (const auto& g : j.at("gates")) out.push_back(wire::gate_from_json(g));
  return out;
}

service::UserRegistration ApiClient::register_user(const std::string& first_name, const std::string& last_name,
                                                   ByteView photo) {
  auto cli = impl_->connect();
  httplib::MultipartFormDataItems items{
      {"first_name", first_name, "", ""},
      {"last_name", last_name, "", ""},
      photo_part(photo),
  };
  auto res = cli.Post("/api/users", auth_headers(impl_->token), items);
  return wire::user_registration_from_json(expect_json(res, 201));
}

policy::User ApiClient::update_user(const policy::UserId& user, std::optional<std::string> first_name,
                                    std::optional<std::string> last_name, std::optional<Bytes> photo) {
  auto cli = impl_->connect();
  httplib::MultipartFormDataItems items;
  if (first_name) items.push_back({"first_name", *first_name, "", ""});
  if (last_name) items.push_back({"last_name", *last_name, "", ""});
  if (photo) items.push_back(photo_part(*photo));
  auto res = cli.Put("/api/users/" + user.value, auth_headers(impl_->token), items);
  return wire::user_from_json(expect_json(res, 200).at("user"));
}

std::vector<policy::User> ApiClient::list_users() {
  auto cli = impl_->connect();
  auto j = expect_json(cli.Get("/api/users", auth_headers(impl_->token)), 200);
  std::vector<policy::User> out;
  for (const auto& u : j.at("users")) out.push_back(wire::user_from_json(u));
  return out;
}

service::CheckinResult ApiClient::checkin(const service::CheckinRequest& request) {
  auto cli = impl_->connect();
  httplib::MultipartFormDataItems items{
      {"server_guid", to_hex(request.server_guid), "", ""},
      {"gate_id", std::to_string(request.gate_id), "", ""},
  };
  if (!request.photo.empty()) items.push_back(photo_part(request.photo));
  if (request.client_time) items.push_back({"client_time", format_utc(*request.client_time), "", ""});
  auto res = cli.Post("/api/checkin", auth_headers(request.device_token, request.time_override), items);
  return wire::checkin_result_from_json(expect_json(res, 200));
}

PolicyRow ApiClient::upsert_policy(const policy::UserId& user, policy::GateId gate, bool enabled,
                                   std::optional<Timestamp> expires_at, std::optional<Timestamp> at) {
  auto cli = impl_->connect();
  json body = {{"enabled", enabled}, {"expires_at", nullptr}};
  if (expires_at) body["expires_at"] = format_utc(*expires_at);
  auto res = cli.Put("/api/gates/" + std::to_string(gate) + "/policies/" + user.value,
                     auth_headers(impl_->token, at), body.dump(), "application/json");
  return row_from_json(expect_json(res, 200));
}

std::vector<PolicyRow> ApiClient::list_policies(policy::GateId gate, std::optional<Timestamp> at) {
  auto cli = impl_->connect();
  auto res = cli.Get("/api/gates/" + std::to_string(gate) + "/policies", auth_headers(impl_->token, at));
  auto j = expect_json(res, 200);
  std::vector<PolicyRow> out;
  for (const auto& row : j.at("policies")) out.push_back(row_from_json(row));
  return out;
}

EventsResult ApiClient::query_events(const EventFilter& filter, Page page) {
  auto cli = impl_->connect();
  auto params = filter_params(filter);
  params.emplace("page", std::to_string(page.number));
  params.emplace("page_size", std::to_string(page.size));
  auto j = expect_json(cli.Get("/api/events", params, auth_headers(impl_->token)), 200);
  EventsResult out;
  out.total = j.at("total").get<std::size_t>();
  for (const auto& e : j.at("events")) out.events.push_back(e.get<AccessEvent>());
  return out;
}

std::vector<AccessEvent> ApiClient::all_events(const EventFilter& filter) {
  std::vector<AccessEvent> out;
  Page page{1, kMaxPageSize};
  for (;;) {
    auto batch = query_events(filter, page);
    out.insert(out.end(), batch.events.begin(), batch.events.end());
    if (batch.events.size() < page.size || out.size() >= batch.total) break;
    ++page.number;
  }
  return out;
}

Bytes ApiClient::get_photo(const std::string& content_hash) {
  auto cli = impl_->connect();
  auto res = cli.Get("/api/photos/" + content_hash, auth_headers(impl_->token));
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw_api_error(res->status, res->body);
  return to_bytes(res->body);
}

// --- feed -------------------------------------------------------------------

struct FeedListener::Impl {
  Impl(std::string h, int p, std::string t, EventFilter f)
      : client(std::move(h), p), token(std::move(t)), filter(std::move(f)) {
    client.set_connection_timeout(std::chrono::seconds(5));
    client.set_read_timeout(std::chrono::minutes(5));
  }

  httplib::Client client;
  std::string token;
  EventFilter filter;
  std::thread thread;
  std::atomic<bool> stopping{false};

  mutable std::mutex mutex;
  std::condition_variable changed;
  std::vector<json> frames;
  std::string partial;
  int status = 0;
  std::string error_body;
  bool finished = false;
  std::string transport_error;

  void run() {
    auto res = client.Get(
        "/api/feed", filter_params(filter), auth_headers(token),
        [this](const httplib::Response& r) {
          std::lock_guard lock(mutex);
          status = r.status;
          changed.notify_all();
          return true;
        },
        [this](const char* data, std::size_t len) {
          if (stopping) return false;
          std::lock_guard lock(mutex);
          if (status != 200) {
            error_body.append(data, len);
            return true;
          }
          partial.append(data, len);
          std::size_t start = 0;
          for (auto nl = partial.find('\n'); nl != std::string::npos; nl = partial.find('\n', start)) {
            auto line = partial.substr(start, nl - start);
            start = nl + 1;
            if (!line.empty()) frames.push_back(json::parse(line, nullptr, false));
          }
          partial.erase(0, start);
          changed.notify_all();
          return true;
        });
    std::lock_guard lock(mutex);
    if (!res && !stopping && status == 0) transport_error = httplib::to_string(res.error());
    finished = true;
    changed.notify_all();
  }
};

FeedListener::FeedListener(std::string host, int port, std::string admin_token, EventFilter filter)
    : impl_(std::make_unique<Impl>(std::move(host), port, std::move(admin_token), std::move(filter))) {}

FeedListener::~FeedListener() { stop(); }

void FeedListener::start(std::chrono::milliseconds timeout) {
  impl_->thread = std::thread([this] { impl_->run(); });
  std::unique_lock lock(impl_->mutex);
  bool ready = impl_->changed.wait_for(lock, timeout, [this] {
    return impl_->finished || (impl_->status == 200 && !impl_->frames.empty());
  });
  if (impl_->status != 0 && impl_->status != 200) {
    impl_->changed.wait_for(lock, timeout, [this] { return impl_->finished; });
    auto status = impl_->status;
    auto body = impl_->error_body;
    lock.unlock();
    stop();
    throw_api_error(status, body);
  }
  if (!ready || impl_->frames.empty()) {
    auto why = impl_->transport_error.empty() ? std::string("no frame received") : impl_->transport_error;
    lock.unlock();
    stop();
    throw TransportError("feed subscription failed: " + why);
  }
}

bool FeedListener::wait_until(const std::function<bool(const std::vector<json>&)>& pred,
                              std::chrono::milliseconds timeout) {
  std::unique_lock lock(impl_->mutex);
  impl_->changed.wait_for(lock, timeout, [&] { return impl_->finished || pred(impl_->frames); });
  return pred(impl_->frames);
}

bool FeedListener::wait_for_events(std::size_t count, std::chrono::milliseconds timeout) {
  return wait_until(
      [count](const std::vector<json>& frames) {
        std::size_t n = 0;
        for (const auto& f : frames)
          if (f.is_object() && f.value("type", "") == "event") ++n;
        return n >= count;
      },
      timeout);
}

std::vector<json> FeedListener::frames() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->frames;
}

std::vector<AccessEvent> FeedListener::events() const {
  std::vector<AccessEvent> out;
  for (const auto& f : frames())
    if (f.is_object() && f.value("type", "") == "event") out.push_back(f.get<AccessEvent>());
  return out;
}

bool FeedListener::ended() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->finished;
}

void FeedListener::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->stopping = true;
  impl_->client.stop();
  impl_->thread.join();
}

}  // namespace gatekeeper::client
