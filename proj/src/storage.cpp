// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/storage.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatekeeper/crypto.hpp"

namespace gatekeeper::storage {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::too_large: return "TooLarge";
    case Errc::undecodable_image: return "UndecodableImage";
    case Errc::dangling_reference: return "DanglingReference";
    case Errc::io_error: return "IoError";
    case Errc::corrupt_data: return "CorruptData";
  }
  return "Unknown";
}

std::string device_token_key(std::string_view device_token) {
  return crypto::sha256_hex(ByteView(reinterpret_cast<const std::uint8_t*>(device_token.data()), device_token.size()));
}

namespace {

constexpr const char* kCredentialsFile = "credentials.json";
constexpr const char* kEntitiesFile = "entities.json";
constexpr const char* kEventsFile = "events.ndjson";
constexpr const char* kBlobDir = "blobs";

[[noreturn]] void throw_io(const std::string& what) {
  throw Error(Errc::io_error, what + ": " + std::strerror(errno));
}

void write_all(int fd, const char* data, std::size_t size, const std::string& what) {
  while (size > 0) {
    ssize_t n = ::write(fd, data, size);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_io(what);
    }
    data += n;
    size -= static_cast<std::size_t>(n);
  }
}

void fsync_dir(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

/// Write to a unique temp file, fsync, rename over `target`, fsync the dir.
void write_file_atomic(const fs::path& target, std::string_view contents, mode_t mode = 0644) {
  fs::path tmp = target;
  tmp += ".tmp-" + crypto::random_token(6);
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, mode);
  if (fd < 0) throw_io("create " + tmp.string());
  try {
    write_all(fd, contents.data(), contents.size(), tmp.string());
    if (::fsync(fd) != 0) throw_io("fsync " + tmp.string());
  } catch (...) {
    ::close(fd);
    ::unlink(tmp.c_str());
    throw;
  }
  ::close(fd);
  if (::rename(tmp.c_str(), target.c_str()) != 0) {
    ::unlink(tmp.c_str());
    throw_io("rename " + target.string());
  }
  fsync_dir(target.parent_path());
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_hash(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(const json& j, const char* field) {
  auto bytes = from_hex(j.at(field).get<std::string>());
  if (!bytes || bytes->size() != N) throw Error(Errc::corrupt_data, std::string("bad ") + field);
  std::array<std::uint8_t, N> out{};
  std::copy(bytes->begin(), bytes->end(), out.begin());
  return out;
}

json entities_to_json(const Entities& e) {
  const auto& reg = e.registry;
  json users = json::array();
  for (const auto& [id, u] : reg.users())
    users.push_back({{"id", u.id.value},
                     {"first_name", u.first_name},
                     {"last_name", u.last_name},
                     {"registration_photo", u.registration_photo}});
  json gates = json::array();
  for (const auto& [id, g] : reg.gates())
    gates.push_back({{"id", g.id}, {"name", g.name}, {"location", g.location}});
  json policies = json::array();
  for (const auto& [key, p] : reg.policies())
    policies.push_back({{"user_id", p.user_id.value},
                        {"gate_id", p.gate_id},
                        {"enabled", p.enabled},
                        {"expires_at", format_utc(p.expires_at)}});
  json devices = json::array();
  for (const auto& [token_key, user] : e.devices)
    devices.push_back({{"token_sha256", token_key}, {"user_id", user.value}});
  return json{{"next_gate_id", reg.next_gate_id()},
              {"next_user_number", reg.next_user_number()},
              {"users", users},
              {"gates", gates},
              {"policies", policies},
              {"devices", devices}};
}

Entities entities_from_json(const json& j) {
  std::vector<policy::User> users;
  for (const auto& u : j.at("users"))
    users.push_back({policy::UserId{u.at("id").get<std::string>()}, u.at("first_name").get<std::string>(),
                     u.at("last_name").get<std::string>(), u.at("registration_photo").get<std::string>()});
  std::vector<policy::Gate> gates;
  for (const auto& g : j.at("gates"))
    gates.push_back({g.at("id").get<policy::GateId>(), g.at("name").get<std::string>(),
                     g.at("location").get<std::string>()});
  std::vector<policy::AccessPolicy> policies;
  for (const auto& p : j.at("policies")) {
    auto expires = parse_utc(p.at("expires_at").get<std::string>());
    if (!expires) throw Error(Errc::corrupt_data, "bad policy expiration");
    policies.push_back({policy::UserId{p.at("user_id").get<std::string>()}, p.at("gate_id").get<policy::GateId>(),
                        p.at("enabled").get<bool>(), *expires});
  }
  Entities e;
  e.registry = policy::AccessRegistry::restore(std::move(users), std::move(gates), std::move(policies),
                                               j.at("next_gate_id").get<policy::GateId>(),
                                               j.at("next_user_number").get<std::uint64_t>());
  for (const auto& d : j.at("devices")) {
    policy::UserId user{d.at("user_id").get<std::string>()};
    if (!e.registry.find_user(user)) throw Error(Errc::corrupt_data, "device bound to unknown user");
    e.devices.emplace(d.at("token_sha256").get<std::string>(), std::move(user));
  }
  return e;
}

}  // namespace

Store::Store(fs::path data_dir) : dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / kBlobDir, ec);
  if (ec) throw Error(Errc::io_error, "create " + dir_.string() + ": " + ec.message());
  load_or_init_credentials();
  load_entities();
  load_events();
}

Store::~Store() {
  if (events_fd_ >= 0) ::close(events_fd_);
}

void Store::load_or_init_credentials() {
  const fs::path path = dir_ / kCredentialsFile;
  if (auto text = read_file(path)) {
    try {
      json j = json::parse(*text);
      credentials_.server_guid = fixed_from_hex<16>(j, "server_guid");
      credentials_.tag_password = fixed_from_hex<4>(j, "tag_password");
      credentials_.admin_token = j.at("admin_token").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::corrupt_data, std::string(kCredentialsFile) + ": " + e.what());
    }
    return;
  }

  // Random (version 4) GUID: 122 random bits.
  auto guid = crypto::random_bytes(16);
  guid[6] = static_cast<std::uint8_t>((guid[6] & 0x0F) | 0x40);
  guid[8] = static_cast<std::uint8_t>((guid[8] & 0x3F) | 0x80);
  std::copy(guid.begin(), guid.end(), credentials_.server_guid.begin());
  auto pw = crypto::random_bytes(4);
  std::copy(pw.begin(), pw.end(), credentials_.tag_password.begin());
  credentials_.admin_token = crypto::random_token(24);

  json j{{"server_guid", to_hex(credentials_.server_guid)},
         {"tag_password", to_hex(credentials_.tag_password)},
         {"admin_token", credentials_.admin_token}};
  write_file_atomic(path, j.dump(2) + "\n", 0600);
}

void Store::load_entities() {
  auto text = read_file(dir_ / kEntitiesFile);
  if (!text) return;
  try {
    entities_ = entities_from_json(json::parse(*text));
  } catch (const json::exception& e) {
    throw Error(Errc::corrupt_data, std::string(kEntitiesFile) + ": " + e.what());
  } catch (const policy::Error& e) {
    throw Error(Errc::corrupt_data, std::string(kEntitiesFile) + ": " + e.what());
  }
}

void Store::persist_entities(const Entities& entities) const {
  write_file_atomic(dir_ / kEntitiesFile, entities_to_json(entities).dump(2) + "\n");
}

void Store::load_events() {
  const fs::path path = dir_ / kEventsFile;
  std::string text = read_file(path).value_or("");

  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final write
    std::string_view line(text.data() + pos, nl - pos);
    AccessEvent event;
    try {
      json::parse(line).get_to(event);
    } catch (const std::exception& e) {
      throw Error(Errc::corrupt_data, std::string(kEventsFile) + " at byte " + std::to_string(pos) + ": " + e.what());
    }
    if (event.event_seq != events_.size() + 1)
      throw Error(Errc::corrupt_data, "event_seq gap at " + std::to_string(event.event_seq));
    events_.push_back(std::move(event));
    pos = nl + 1;
    good_end = pos;
  }

  events_fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (events_fd_ < 0) throw_io("open " + path.string());
  if (good_end < text.size() && ::ftruncate(events_fd_, static_cast<off_t>(good_end)) != 0)
    throw_io("truncate " + path.string());
}

fs::path Store::blob_path(std::string_view hash, photo::MediaType type) const {
  std::string name(hash);
  name += '.';
  name += photo::extension(type);
  return dir_ / kBlobDir / std::string(hash.substr(0, 2)) / name;
}

std::string Store::put_photo(ByteView bytes, photo::MediaType media_type) {
  if (bytes.size() > photo::kMaxPhotoBytes)
    throw Error(Errc::too_large, std::to_string(bytes.size()) + " bytes");
  if (!photo::decodes_as(bytes, media_type))
    throw Error(Errc::undecodable_image, "not a valid " + std::string(photo::to_string(media_type)));

  std::string hash = crypto::sha256_hex(bytes);
  const fs::path path = blob_path(hash, media_type);
  std::error_code ec;
  if (fs::exists(path, ec)) return hash;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::io_error, ec.message());
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return hash;
}

std::optional<PhotoBlob> Store::get_photo(std::string_view content_hash) const {
  if (!is_hash(content_hash)) return std::nullopt;
  for (auto type : {photo::MediaType::png, photo::MediaType::jpeg}) {
    if (auto data = read_file(blob_path(content_hash, type)))
      return PhotoBlob{std::string(content_hash), type, to_bytes(*data)};
  }
  return std::nullopt;
}

bool Store::has_photo(std::string_view content_hash) const {
  if (!is_hash(content_hash)) return false;
  std::error_code ec;
  return fs::exists(blob_path(content_hash, photo::MediaType::png), ec) ||
         fs::exists(blob_path(content_hash, photo::MediaType::jpeg), ec);
}

std::optional<policy::UserId> Store::user_for_device(std::string_view device_token) const {
  const auto key = device_token_key(device_token);
  std::shared_lock lock(entities_mutex_);
  auto it = entities_.devices.find(key);
  if (it == entities_.devices.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Store::append_event(AccessEvent event, const std::function<void(const AccessEvent&)>& on_commit) {
  std::unique_lock lock(events_mutex_);

  read([&](const Entities& e) {
    if (!e.registry.find_user(event.user_id))
      throw Error(Errc::dangling_reference, "user " + event.user_id.value);
    if (event.gate_id && !e.registry.find_gate(*event.gate_id))
      throw Error(Errc::dangling_reference, "gate " + std::to_string(*event.gate_id));
  });
  if (!has_photo(event.registration_photo))
    throw Error(Errc::dangling_reference, "photo " + event.registration_photo);
  if (event.gate_photo && !has_photo(*event.gate_photo))
    throw Error(Errc::dangling_reference, "photo " + *event.gate_photo);

  event.event_seq = events_.size() + 1;
  std::string line = json(event).dump() + "\n";
  const off_t before = ::lseek(events_fd_, 0, SEEK_END);
  try {
    write_all(events_fd_, line.data(), line.size(), kEventsFile);
    if (::fdatasync(events_fd_) != 0) throw_io("fdatasync events");
  } catch (...) {
    // Drop any partial line so the next append starts on a clean boundary.
    if (before >= 0) (void)!::ftruncate(events_fd_, before);
    throw;
  }

  events_.push_back(std::move(event));
  if (on_commit) on_commit(events_.back());
  return events_.back().event_seq;
}

std::vector<AccessEvent> Store::scan_events(const EventFilter& filter) const {
  std::shared_lock lock(events_mutex_);
  std::vector<AccessEvent> out;
  std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
               [&](const AccessEvent& e) { return filter.matches(e); });
  return out;
}

std::size_t Store::event_count() const {
  std::shared_lock lock(events_mutex_);
  return events_.size();
}

}  // namespace gatekeeper::storage
