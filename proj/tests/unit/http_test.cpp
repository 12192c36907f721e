// SPDX-License-Identifier: Apache-2.0
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "gatekeeper/wire.hpp"
#include "support/harness.hpp"

using namespace gatekeeper;
using namespace std::chrono_literals;
using client::ApiError;
using nlohmann::json;
using policy::DenyReason;

namespace {

const Timestamp kNow = *parse_utc("2026-04-01T12:00:00Z");

int status_of(const std::function<void()>& fn, std::string* id = nullptr) {
  try {
    fn();
  } catch (const ApiError& e) {
    if (id) *id = e.error_id();
    return e.status();
  }
  return 200;
}

struct World {
  service::GateRegistration lobby;
  service::UserRegistration alice;
};

World populate(client::ApiClient& api) {
  World w;
  w.lobby = api.register_gate("lobby", "ground floor");
  w.alice = api.register_user("Alice", "Archer", gktest::photo("alice.png"));
  api.upsert_policy(w.alice.user.id, w.lobby.gate.id, true, kNow + 1h, kNow);
  return w;
}

service::CheckinRequest checkin_for(const World& w, Timestamp at = kNow) {
  service::CheckinRequest r;
  r.device_token = w.alice.device_token;
  r.server_guid = w.lobby.tag.server_guid;
  r.gate_id = w.lobby.gate.id;
  r.photo = gktest::photo("gate_a.jpg");
  r.time_override = at;
  return r;
}

}  // namespace

TEST(Http, GateAndUserRegistration) {
  gktest::TestServer server;
  auto api = server.client();
  auto w = populate(api);
  EXPECT_EQ(w.lobby.gate.id, 1u);
  EXPECT_EQ(w.lobby.tag.server_guid, server.store().credentials().server_guid);
  EXPECT_EQ(w.lobby.tag_password, server.store().credentials().tag_password);
  EXPECT_EQ(api.list_gates().size(), 1u);
  EXPECT_EQ(api.list_users().size(), 1u);

  std::string id;
  EXPECT_EQ(status_of([&] { api.register_gate("lobby", "dup"); }, &id), 409);
  EXPECT_EQ(id, "duplicate_name");
  EXPECT_EQ(status_of([&] { api.register_user("", "X", gktest::photo("alice.png")); }, &id), 400);
  EXPECT_EQ(id, "missing_name");
  EXPECT_EQ(status_of([&] { api.register_user("A", "B", gktest::photo("not_an_image.png")); }, &id), 400);
  EXPECT_EQ(id, "invalid_photo");

  client::ApiClient anonymous("127.0.0.1", server.port(), "wrong");
  EXPECT_EQ(status_of([&] { anonymous.list_gates(); }, &id), 401);
  EXPECT_EQ(id, "unauthorized");
}

TEST(Http, OversizedPhotoIs413) {
  gktest::TestServer server;
  auto api = server.client();
  Bytes huge(6 * 1024 * 1024, 0);
  auto png = gktest::photo("alice.png");
  std::copy(png.begin(), png.end(), huge.begin());
  std::string id;
  EXPECT_EQ(status_of([&] { api.register_user("A", "B", huge); }, &id), 413);
  EXPECT_EQ(id, "too_large");
}

TEST(Http, CheckinAndVirtualTime) {
  gktest::TestServer server;
  auto api = server.client();
  auto w = populate(api);
  auto r = api.checkin(checkin_for(w, kNow + 1h - 1s));
  EXPECT_TRUE(r.decision.granted());
  EXPECT_EQ(r.event_seq, 1u);
  r = api.checkin(checkin_for(w, kNow + 1h));
  EXPECT_EQ(r.decision.reason(), DenyReason::policy_expired);

  auto bad = checkin_for(w);
  bad.device_token = "nope";
  EXPECT_EQ(status_of([&] { api.checkin(bad); }), 401);

  auto rows = api.list_policies(w.lobby.gate.id, kNow);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "active");
  EXPECT_EQ(rows[0].user.first_name, "Alice");
  EXPECT_EQ(api.list_policies(w.lobby.gate.id, kNow + 1h)[0].status, "expired");
  EXPECT_EQ(api.upsert_policy(w.alice.user.id, w.lobby.gate.id, false, kNow + 1h, kNow).status, "disabled");
  std::string id;
  EXPECT_EQ(status_of([&] { api.upsert_policy(w.alice.user.id, w.lobby.gate.id, true, std::nullopt); }, &id), 400);
  EXPECT_EQ(id, "missing_expiration");
  EXPECT_EQ(status_of([&] { api.upsert_policy(policy::UserId{"u77"}, w.lobby.gate.id, true, kNow); }, &id), 404);
  EXPECT_EQ(id, "unknown_user");
  EXPECT_EQ(status_of([&] { api.list_policies(42); }, &id), 404);
  EXPECT_EQ(id, "unknown_gate");
}

TEST(Http, TimeOverrideRefusedOutsideTestMode) {
  gktest::TestServer server(false);
  auto api = server.client();
  auto w = populate(api);
  std::string id;
  EXPECT_EQ(status_of([&] { api.checkin(checkin_for(w)); }, &id), 403);
  EXPECT_EQ(id, "time_override_refused");
  auto real = checkin_for(w);
  real.time_override.reset();
  EXPECT_NO_THROW(api.checkin(real));
}

TEST(Http, MalformedRequests) {
  gktest::TestServer server;
  httplib::Client raw("127.0.0.1", server.port());
  httplib::Headers auth{{"Authorization", "Bearer " + server.admin_token()}};
  auto res = raw.Post("/api/gates", auth, "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "bad_request");

  res = raw.Get("/api/events?page=0", auth);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = raw.Get("/api/events?page_size=5000", auth);
  EXPECT_EQ(res->status, 400);
  res = raw.Get("/api/events?from=2026-01-02T00:00:00Z&to=2026-01-01T00:00:00Z", auth);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "bad_time_range");
  res = raw.Get("/api/events?from=yesterday", auth);
  EXPECT_EQ(res->status, 400);
  res = raw.Get("/api/photos/" + std::string(64, 'a'), auth);
  EXPECT_EQ(res->status, 404);
  res = raw.Get("/api/health");
  EXPECT_EQ(res->status, 200);
}

TEST(Http, PhotosServedWithContentType) {
  gktest::TestServer server;
  auto api = server.client();
  auto w = populate(api);
  auto bytes = api.get_photo(w.alice.user.registration_photo);
  EXPECT_EQ(bytes, gktest::photo("alice.png"));
  api.checkin(checkin_for(w));
  auto events = api.all_events();
  ASSERT_EQ(events.size(), 1u);
  ASSERT_TRUE(events[0].gate_photo);
  EXPECT_EQ(api.get_photo(*events[0].gate_photo), gktest::photo("gate_a.jpg"));
  httplib::Client raw("127.0.0.1", server.port());
  auto res = raw.Get("/api/photos/" + *events[0].gate_photo,
                     httplib::Headers{{"Authorization", "Bearer " + server.admin_token()}});
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/jpeg");
}

TEST(Http, UserUpdate) {
  gktest::TestServer server;
  auto api = server.client();
  auto w = populate(api);
  auto u = api.update_user(w.alice.user.id, "Alicia", std::nullopt, std::nullopt);
  EXPECT_EQ(u.first_name, "Alicia");
  EXPECT_EQ(u.last_name, "Archer");
  EXPECT_EQ(u.registration_photo, w.alice.user.registration_photo);
  EXPECT_EQ(status_of([&] { api.update_user(policy::UserId{"u5"}, "x", std::nullopt, std::nullopt); }), 404);
}

TEST(Http, EventFiltersMatchBruteForce) {
  gktest::TestServer server;
  auto api = server.client();
  auto w = populate(api);
  auto lab = api.register_gate("lab", "");
  auto bob = api.register_user("Bob", "Baker", gktest::photo("bob.png"));
  api.upsert_policy(bob.user.id, lab.gate.id, true, kNow + 30min, kNow);
  for (int i = 0; i < 40; ++i) {
    auto r = checkin_for(w, kNow + std::chrono::minutes(i));
    if (i % 2) r.device_token = bob.device_token;
    if (i % 3 == 0) {
      r.gate_id = lab.gate.id;
    }
    if (i % 7 == 0) r.gate_id = 99;
    api.checkin(r);
  }
  const auto all = api.all_events();
  ASSERT_EQ(all.size(), 40u);
  std::vector<EventFilter> filters(1);
  for (auto gate : {w.lobby.gate.id, lab.gate.id, policy::GateId{99}}) {
    EventFilter f;
    f.gate_id = gate;
    filters.push_back(f);
  }
  for (const auto& user : {w.alice.user.id, bob.user.id}) {
    EventFilter f;
    f.user_id = user;
    filters.push_back(f);
    f.denied_only = true;
    filters.push_back(f);
  }
  EventFilter window;
  window.time_from = kNow + 10min;
  window.time_to = kNow + 20min;
  filters.push_back(window);
  window.denied_only = true;
  window.gate_id = lab.gate.id;
  filters.push_back(window);

  for (const auto& f : filters) {
    std::vector<AccessEvent> expected;
    for (const auto& e : all)
      if (f.matches(e)) expected.push_back(e);
    EXPECT_EQ(api.all_events(f), expected);
    EXPECT_EQ(api.query_events(f, Page{1, 3}).total, expected.size());
  }
  EventFilter window_only;
  window_only.time_from = kNow + 10min;
  window_only.time_to = kNow + 20min;
  EXPECT_EQ(api.all_events(window_only).size(), 10u);
}

TEST(Http, ParallelCheckinsHaveGapFreeSequence) {
  gktest::TestServer server;
  auto api = server.client();
  auto report = sim::run_stress(api, gktest::photo("alice.png"), 100, 100);
  EXPECT_EQ(report.failures, 0u);
  EXPECT_TRUE(report.gap_free());
  ASSERT_EQ(report.seqs.size(), 100u);
  EXPECT_EQ(report.seqs.front(), 1u);
  EXPECT_EQ(report.seqs.back(), 100u);
  EXPECT_EQ(server.store().event_count(), 100u);
}

TEST(Http, GuidStableAcrossRestart) {
  gktest::TempDir dir;
  ndef::Guid first;
  {
    gktest::TestServer server(true, {}, dir.path() / "d");
    auto api = server.client();
    first = api.register_gate("lobby", "").tag.server_guid;
  }
  gktest::TestServer server(true, {}, dir.path() / "d");
  auto api = server.client();
  auto second = api.register_gate("lab", "");
  EXPECT_EQ(second.tag.server_guid, first);
  EXPECT_EQ(second.gate.id, 2u);
}

TEST(HttpFeed, StreamsCommittedEventsInOrder) {
  http::ServerOptions opts;
  opts.heartbeat = 200ms;
  gktest::TestServer server(true, opts);
  auto api = server.client();
  auto w = populate(api);

  client::FeedListener everything("127.0.0.1", server.port(), server.admin_token());
  everything.start();
  EventFilter denied;
  denied.denied_only = true;
  client::FeedListener only_denied("127.0.0.1", server.port(), server.admin_token(), denied);
  only_denied.start();

  for (int i = 0; i < 6; ++i) api.checkin(checkin_for(w, kNow + std::chrono::minutes(i * 15)));
  ASSERT_TRUE(everything.wait_for_events(6, 5s));
  ASSERT_TRUE(only_denied.wait_for_events(2, 5s));
  // Heartbeats keep flowing on an idle stream.
  ASSERT_TRUE(everything.wait_until(
      [](const std::vector<json>& frames) {
        return std::count_if(frames.begin(), frames.end(),
                             [](const json& f) { return f.value("type", "") == "heartbeat"; }) >= 2;
      },
      3s));

  auto persisted = api.all_events();
  std::reverse(persisted.begin(), persisted.end());
  EXPECT_EQ(everything.events(), persisted);
  std::vector<AccessEvent> denied_persisted;
  for (const auto& e : persisted)
    if (!e.decision.granted()) denied_persisted.push_back(e);
  EXPECT_EQ(only_denied.events(), denied_persisted);
}

TEST(HttpFeed, RefusesBadToken) {
  gktest::TestServer server;
  client::FeedListener listener("127.0.0.1", server.port(), "nope");
  try {
    listener.start(2s);
    FAIL() << "expected ApiError";
  } catch (const ApiError& e) {
    EXPECT_EQ(e.status(), 401);
  }
}

TEST(HttpFeed, OverflowEndsStreamWithErrorFrame) {
  gktest::TempDir dir;
  storage::Store store(dir.path());
  feed::EventFeed feed(2);
  service::AccessService svc(store, feed, service::Config{});
  http::ApiServer server(svc);
  int port = server.start();
  client::FeedListener listener("127.0.0.1", port, store.credentials().admin_token);
  listener.start();

  // A burst far faster than one stream can drain a two-slot buffer.
  for (std::uint64_t i = 1; i <= 5000; ++i) {
    AccessEvent e;
    e.event_seq = i;
    e.user_id = policy::UserId{"u1"};
    feed.publish(e);
  }
  ASSERT_TRUE(listener.wait_until(
      [](const std::vector<json>& frames) { return !frames.empty() && frames.back().value("type", "") == "error"; },
      5s));
  auto frames = listener.frames();
  EXPECT_EQ(frames.back(), json::parse(R"({"type":"error","reason":"overflow"})"));
  std::uint64_t expected = 1;
  for (const auto& e : listener.events()) EXPECT_EQ(e.event_seq, expected++);
  EXPECT_LT(expected, 5001u);
  // Returns as soon as the server closes the stream.
  listener.wait_until([](const std::vector<json>&) { return false; }, 2s);
  EXPECT_TRUE(listener.ended());
  EXPECT_EQ(feed.subscriber_count(), 0u);
  feed.shutdown();
  server.stop();
}
