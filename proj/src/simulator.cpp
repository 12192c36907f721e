// SPDX-License-Identifier: Apache-2.0
#include "gatekeeper/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <mutex>
#include <thread>

#include "gatekeeper/crypto.hpp"

namespace gatekeeper::sim {

namespace fs = std::filesystem;

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::file_exists: return "FileExists";
    case Errc::file_missing: return "FileMissing";
    case Errc::io_error: return "IoError";
    case Errc::stress_failed: return "StressFailed";
  }
  return "Unknown";
}

tag::TagChip program_gate_tag(const service::GateRegistration& registration, const ProvisionOptions& options) {
  auto chip = tag::TagChip::create(options.standard, options.seed);
  auto message = ndef::encode_message(ndef::build_gate_tag_message(registration.tag));
  chip.write_ndef(message);
  chip.set_password(registration.tag_password);
  if (options.lock) chip.lock_readonly(registration.tag_password);
  return chip;
}

Provisioned provision_tag(client::ApiClient& api, const std::string& name, const std::string& location,
                          const fs::path& out_path, const ProvisionOptions& options) {
  if (fs::exists(out_path)) throw Error(Errc::file_exists, out_path.string());
  auto registration = api.register_gate(name, location);
  Provisioned out{registration, program_gate_tag(registration, options)};
  write_file(out_path, tag::save_tag_image(out.tag), false);
  return out;
}

ndef::GateTagPayload read_gate_tag(const tag::TagChip& tag) {
  return ndef::parse_gate_tag_message(ndef::decode_message(tag.read_ndef()));
}

Bytes read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fs::exists(path) ? Errc::io_error : Errc::file_missing, path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, ByteView bytes, bool overwrite) {
  if (!overwrite && fs::exists(path)) throw Error(Errc::file_exists, path.string());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) throw Error(Errc::io_error, tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io_error, path.string() + ": " + ec.message());
}

tag::TagChip load_tag_file(const fs::path& path) { return tag::load_tag_image(read_file(path)); }

service::CheckinResult checkin_with_tag(client::ApiClient& api, const tag::TagChip& tag,
                                        const std::string& device_token, Bytes photo,
                                        const CheckinOptions& options) {
  auto payload = read_gate_tag(tag);
  service::CheckinRequest req;
  req.device_token = device_token;
  req.server_guid = payload.server_guid;
  req.gate_id = payload.gate_id;
  req.photo = std::move(photo);
  req.client_time = options.client_time;
  req.time_override = options.time_override;
  return api.checkin(req);
}

bool StressReport::gap_free() const {
  if (seqs.size() != requested) return false;
  for (std::size_t i = 1; i < seqs.size(); ++i)
    if (seqs[i] != seqs[i - 1] + 1) return false;
  return true;
}

StressReport run_stress(client::ApiClient& api, ByteView photo, std::size_t count, std::size_t parallel) {
  const std::string suffix = crypto::random_token(4);
  auto gate = api.register_gate("stress-" + suffix, "stress test");
  auto user = api.register_user("Stress", "Tester " + suffix, photo);
  api.upsert_policy(user.user.id, gate.gate.id, true, now_utc() + std::chrono::hours(24));
  auto chip = program_gate_tag(gate);

  StressReport report;
  report.requested = count;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const Bytes photo_bytes(photo.begin(), photo.end());
  for (std::size_t t = 0; t < std::max<std::size_t>(parallel, 1); ++t) {
    workers.emplace_back([&] {
      client::ApiClient local(api.host(), api.port(), api.admin_token());
      while (next.fetch_add(1) < count) {
        try {
          auto result = checkin_with_tag(local, chip, user.device_token, photo_bytes);
          std::lock_guard lock(mutex);
          report.seqs.push_back(result.event_seq);
        } catch (const std::exception& e) {
          std::lock_guard lock(mutex);
          if (report.failures++ == 0) report.first_error = e.what();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  std::sort(report.seqs.begin(), report.seqs.end());
  return report;
}

}  // namespace gatekeeper::sim
