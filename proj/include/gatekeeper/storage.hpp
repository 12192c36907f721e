// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "gatekeeper/bytes.hpp"
#include "gatekeeper/error.hpp"
#include "gatekeeper/events.hpp"
#include "gatekeeper/ndef.hpp"
#include "gatekeeper/photo.hpp"
#include "gatekeeper/policy.hpp"
#include "gatekeeper/tag.hpp"

namespace gatekeeper::storage {

enum class Errc {
  too_large,
  undecodable_image,
  dangling_reference,
  io_error,
  corrupt_data,
};

std::string_view to_string(Errc code);

using Error = BasicError<Errc>;

/// Per-deployment secrets, generated once on first open and never rotated.
struct OrgCredentials {
  ndef::Guid server_guid{};
  tag::Password tag_password{};
  std::string admin_token;
};

struct PhotoBlob {
  std::string content_hash;
  photo::MediaType media_type = photo::MediaType::png;
  Bytes bytes;
};

/// Everything mutable besides the event log: the policy registry plus the
/// device-token index (SHA-256 of token -> user).
struct Entities {
  policy::AccessRegistry registry;
  std::map<std::string, policy::UserId> devices;
};

/// Data directory layout:
///   credentials.json   OrgCredentials (mode 0600)
///   entities.json      Entities, atomically replaced on every change
///   events.ndjson      append-only event log, one JSON object per line
///   blobs/ab/<sha256>.{png,jpg}
class Store {
 public:
  /// Opens the directory, creating and initializing it when empty.
  explicit Store(std::filesystem::path data_dir);
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& data_dir() const { return dir_; }
  const OrgCredentials& credentials() const { return credentials_; }

  // --- photos -------------------------------------------------------------

  /// Validates and stores the image; idempotent. Returns the hex SHA-256.
  std::string put_photo(ByteView bytes, photo::MediaType media_type);
  std::optional<PhotoBlob> get_photo(std::string_view content_hash) const;
  bool has_photo(std::string_view content_hash) const;

  // --- entities -----------------------------------------------------------

  /// Runs `fn` against the current entities under a shared lock.
  template <typename Fn>
  auto read(Fn&& fn) const {
    std::shared_lock lock(entities_mutex_);
    return fn(static_cast<const Entities&>(entities_));
  }

  /// Runs `fn` on a copy of the entities, persists the copy, then publishes
  /// it. If `fn` or persistence throws, nothing changes.
  template <typename Fn>
  auto update(Fn&& fn) {
    std::unique_lock lock(entities_mutex_);
    Entities next = entities_;
    if constexpr (std::is_void_v<decltype(fn(next))>) {
      fn(next);
      persist_entities(next);
      entities_ = std::move(next);
    } else {
      auto result = fn(next);
      persist_entities(next);
      entities_ = std::move(next);
      return result;
    }
  }

  std::optional<policy::UserId> user_for_device(std::string_view device_token) const;

  // --- event log ----------------------------------------------------------

  /// Assigns the next event_seq, checks references, writes and syncs the
  /// log line. `on_commit` runs while the append lock is still held, so
  /// callbacks observe events in event_seq order.
  std::uint64_t append_event(AccessEvent event,
                             const std::function<void(const AccessEvent&)>& on_commit = {});

  /// Matching events in ascending event_seq order.
  std::vector<AccessEvent> scan_events(const EventFilter& filter) const;

  std::size_t event_count() const;

 private:
  void load_or_init_credentials();
  void load_entities();
  void load_events();
  void persist_entities(const Entities& entities) const;
  std::filesystem::path blob_path(std::string_view hash, photo::MediaType type) const;

  std::filesystem::path dir_;
  OrgCredentials credentials_;

  mutable std::shared_mutex entities_mutex_;
  Entities entities_;

  mutable std::shared_mutex events_mutex_;
  std::vector<AccessEvent> events_;
  int events_fd_ = -1;
};

/// Hex SHA-256 as used for device-token lookup.
std::string device_token_key(std::string_view device_token);

}  // namespace gatekeeper::storage
