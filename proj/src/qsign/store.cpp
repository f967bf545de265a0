#include "qsign/store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "qsign/error.hpp"
#include "qsign/hash.hpp"
#include "qsign/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace qsign::qsim {

void to_json(json& j, const BellVector& b) {
  j = json{{"p00", b.p00}, {"p01", b.p01}, {"p10", b.p10}, {"p11", b.p11}};
}

void from_json(const json& j, BellVector& b) {
  j.at("p00").get_to(b.p00);
  j.at("p01").get_to(b.p01);
  j.at("p10").get_to(b.p10);
  j.at("p11").get_to(b.p11);
}

}  // namespace qsign::qsim

namespace qsign::sig {

void to_json(json& j, const HslColor& c) { j = json{{"h", c.h}, {"s", c.s}, {"l", c.l}}; }

void from_json(const json& j, HslColor& c) {
  j.at("h").get_to(c.h);
  j.at("s").get_to(c.s);
  j.at("l").get_to(c.l);
}

void to_json(json& j, const Badge& b) {
  j = json{{"q_num", b.q_num},         {"pk_hash", b.pk_hash}, {"signature", b.signature},
           {"color", b.color},         {"nonce_hex", b.nonce_hex}};
}

void from_json(const json& j, Badge& b) {
  j.at("q_num").get_to(b.q_num);
  j.at("pk_hash").get_to(b.pk_hash);
  j.at("signature").get_to(b.signature);
  j.at("color").get_to(b.color);
  j.at("nonce_hex").get_to(b.nonce_hex);
}

}  // namespace qsign::sig

namespace qsign::store {

Provenance provenance_of(const backend::QuantumResult& qr) {
  return {qr.device, qr.algorithm, qr.duration_ms, qr.bell, qr.q_num, qr.rng_seed};
}

std::string_view to_string(SignatureStatus s) {
  return s == SignatureStatus::completed ? "completed" : "generating";
}

void to_json(json& j, const MessageRecord& r) {
  j = json::object();
  j["group_id"] = r.group_id;
  j["message_id"] = r.message_id;
  j["timestamp_ms"] = r.timestamp_ms;
  j["sender_name"] = r.sender_name;
  j["sender_handle"] = r.sender_handle;
  j["text"] = r.text;
  j["photo_ref"] = r.photo_ref ? json(*r.photo_ref) : json(nullptr);
  j["position"] = r.position ? json{{"x_pct", r.position->x_pct}, {"y_pct", r.position->y_pct}}
                             : json(nullptr);
  j["hidden"] = r.hidden;
  j["signature_status"] = to_string(r.signature_status);
  j["badge"] = r.badge ? json(*r.badge) : json(nullptr);
  if (r.provenance) {
    const auto& p = *r.provenance;
    j["provenance"] = {{"device", p.device},         {"algorithm", p.algorithm},
                       {"duration_ms", p.duration_ms}, {"bell", p.bell},
                       {"q_num", p.q_num},             {"rng_seed", p.rng_seed}};
  } else {
    j["provenance"] = nullptr;
  }
}

void from_json(const json& j, MessageRecord& r) {
  j.at("group_id").get_to(r.group_id);
  j.at("message_id").get_to(r.message_id);
  j.at("timestamp_ms").get_to(r.timestamp_ms);
  j.at("sender_name").get_to(r.sender_name);
  j.at("sender_handle").get_to(r.sender_handle);
  j.at("text").get_to(r.text);
  r.photo_ref.reset();
  if (j.contains("photo_ref") && !j["photo_ref"].is_null()) r.photo_ref = j["photo_ref"].get<std::string>();
  r.position.reset();
  if (j.contains("position") && !j["position"].is_null()) {
    r.position = Position{j["position"].at("x_pct").get<double>(), j["position"].at("y_pct").get<double>()};
  }
  r.hidden = j.value("hidden", false);
  const auto status = j.at("signature_status").get<std::string>();
  if (status == "completed") {
    r.signature_status = SignatureStatus::completed;
  } else if (status == "generating") {
    r.signature_status = SignatureStatus::generating;
  } else {
    throw Error(ErrorCode::parse, "unknown signature_status '" + status + "'");
  }
  r.badge.reset();
  if (j.contains("badge") && !j["badge"].is_null()) r.badge = j["badge"].get<sig::Badge>();
  r.provenance.reset();
  if (j.contains("provenance") && !j["provenance"].is_null()) {
    const auto& p = j["provenance"];
    r.provenance = Provenance{p.at("device").get<std::string>(), p.at("algorithm").get<std::string>(),
                              p.at("duration_ms").get<std::int64_t>(), p.at("bell").get<qsim::BellVector>(),
                              p.at("q_num").get<int>(), p.value("rng_seed", std::uint64_t{0})};
  }
}

std::string encode_record(const MessageRecord& r) { return json(r).dump(2) + "\n"; }

namespace {

bool is_id_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-';
}

bool valid_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), is_id_char);
}

void write_atomically(const fs::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool is_valid_group_id(std::string_view id) { return valid_id(id); }
bool is_valid_message_id(std::string_view id) { return valid_id(id); }

std::size_t char_count(std::string_view utf8) { return text::decode_utf8(utf8).size(); }

struct Store::Group {
  mutable std::shared_mutex mutex;
  std::map<SortKey, MessageRecord> records;
  std::map<std::string, SortKey> by_id;
};

Store::Store(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_.empty()) {
    fs::create_directories(data_dir_ / "messages");
    fs::create_directories(data_dir_ / "blobs");
    load();
  }
}

Store::~Store() = default;

void Store::load() {
  for (const auto& group_dir : fs::directory_iterator(data_dir_ / "messages")) {
    if (!group_dir.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(group_dir.path())) {
      if (file.path().extension() != ".json") continue;
      try {
        auto record = json::parse(read_file(file.path())).get<MessageRecord>();
        auto& g = group_for_write(record.group_id);
        SortKey key{record.timestamp_ms, record.message_id};
        g.by_id[record.message_id] = key;
        g.records[key] = std::move(record);
      } catch (const std::exception& e) {
        spdlog::error("skipping unreadable record {}: {}", file.path().string(), e.what());
      }
    }
  }
}

Store::Group* Store::find_group(const std::string& group_id) const {
  std::shared_lock lock(groups_mutex_);
  auto it = groups_.find(group_id);
  return it == groups_.end() ? nullptr : it->second.get();
}

Store::Group& Store::group_for_write(const std::string& group_id) {
  if (auto* g = find_group(group_id)) return *g;
  std::unique_lock lock(groups_mutex_);
  auto& slot = groups_[group_id];
  if (!slot) slot = std::make_unique<Group>();
  return *slot;
}

void Store::persist(const MessageRecord& record) const {
  if (data_dir_.empty()) return;
  const auto dir = data_dir_ / "messages" / ("GROUP#" + record.group_id);
  fs::create_directories(dir);
  std::ostringstream name;
  name << "MSG#" << std::setw(13) << std::setfill('0') << record.timestamp_ms << '#'
       << record.message_id << ".json";
  write_atomically(dir / name.str(), encode_record(record));
}

bool Store::put_phase1(const MessageRecord& record) {
  if (!valid_id(record.group_id)) contract_violation("invalid group id");
  if (!valid_id(record.message_id)) contract_violation("invalid message id");
  if (record.timestamp_ms < 0) contract_violation("timestamp must be non-negative");
  if (record.signature_status != SignatureStatus::generating || record.badge || record.provenance) {
    contract_violation("phase-1 records must be generating without badge or provenance");
  }
  if (char_count(record.text) > kMaxTextChars) contract_violation("text exceeds 4096 characters");

  auto& g = group_for_write(record.group_id);
  std::unique_lock lock(g.mutex);
  if (g.by_id.contains(record.message_id)) return false;
  persist(record);
  SortKey key{record.timestamp_ms, record.message_id};
  g.by_id.emplace(record.message_id, key);
  g.records.emplace(key, record);
  return true;
}

template <typename Fn>
void Store::mutate(const std::string& group_id, const std::string& message_id, Fn&& fn) {
  auto* g = find_group(group_id);
  if (g == nullptr) throw Error(ErrorCode::not_found, "unknown group " + group_id);
  std::unique_lock lock(g->mutex);
  auto it = g->by_id.find(message_id);
  if (it == g->by_id.end()) {
    throw Error(ErrorCode::not_found, "unknown message " + message_id + " in group " + group_id);
  }
  auto& slot = g->records.at(it->second);
  MessageRecord next = slot;
  if (!fn(next)) return;
  persist(next);
  slot = std::move(next);
}

bool Store::complete_signature(const std::string& group_id, const std::string& message_id,
                               const sig::Badge& badge, const Provenance& provenance) {
  bool changed = false;
  mutate(group_id, message_id, [&](MessageRecord& r) {
    if (r.signature_status == SignatureStatus::completed) return false;
    r.signature_status = SignatureStatus::completed;
    r.badge = badge;
    r.provenance = provenance;
    changed = true;
    return true;
  });
  return changed;
}

void Store::soft_delete(const std::string& group_id, const std::string& message_id) {
  mutate(group_id, message_id, [](MessageRecord& r) {
    if (r.hidden) return false;
    r.hidden = true;
    return true;
  });
}

void Store::set_position(const std::string& group_id, const std::string& message_id, double x_pct,
                         double y_pct) {
  auto in_range = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 100.0; };
  if (!in_range(x_pct) || !in_range(y_pct)) contract_violation("position must be within [0,100]");
  mutate(group_id, message_id, [&](MessageRecord& r) {
    r.position = Position{x_pct, y_pct};
    return true;
  });
}

std::vector<MessageRecord> Store::list_messages(const std::string& group_id,
                                                std::optional<std::int64_t> since_ms) const {
  std::vector<MessageRecord> out;
  auto* g = find_group(group_id);
  if (g == nullptr) return out;
  std::shared_lock lock(g->mutex);
  auto it = since_ms ? g->records.lower_bound(SortKey{*since_ms + 1, std::string{}})
                     : g->records.begin();
  for (; it != g->records.end(); ++it) {
    if (!it->second.hidden) out.push_back(it->second);
  }
  return out;
}

std::vector<MessageRecord> Store::admin_list(const std::string& group_id) const {
  std::vector<MessageRecord> out;
  auto* g = find_group(group_id);
  if (g == nullptr) return out;
  std::shared_lock lock(g->mutex);
  out.reserve(g->records.size());
  for (const auto& [_, r] : g->records) out.push_back(r);
  return out;
}

std::optional<MessageRecord> Store::get(const std::string& group_id,
                                        const std::string& message_id) const {
  auto* g = find_group(group_id);
  if (g == nullptr) return std::nullopt;
  std::shared_lock lock(g->mutex);
  auto it = g->by_id.find(message_id);
  if (it == g->by_id.end()) return std::nullopt;
  return g->records.at(it->second);
}

GroupSummary Store::summary(const std::string& group_id) const {
  GroupSummary s{group_id, 0, {}};
  auto* g = find_group(group_id);
  if (g == nullptr) return s;
  std::map<std::string, std::size_t> counts;
  {
    std::shared_lock lock(g->mutex);
    for (const auto& [_, r] : g->records) {
      if (r.hidden) continue;
      ++s.message_count;
      ++counts[r.sender_handle];
    }
  }
  for (auto& [handle, n] : counts) s.leaderboard.push_back({handle, n});
  std::stable_sort(s.leaderboard.begin(), s.leaderboard.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  return s;
}

std::vector<GroupSummary> Store::groups() const {
  std::vector<std::string> ids;
  {
    std::shared_lock lock(groups_mutex_);
    for (const auto& [id, _] : groups_) ids.push_back(id);
  }
  std::vector<GroupSummary> out;
  for (const auto& id : ids) out.push_back(summary(id));
  return out;
}

std::size_t Store::record_count() const {
  std::shared_lock lock(groups_mutex_);
  std::size_t n = 0;
  for (const auto& [_, g] : groups_) {
    std::shared_lock glock(g->mutex);
    n += g->records.size();
  }
  return n;
}

BlobRef Store::put_blob(std::span<const std::uint8_t> bytes, const std::string& media_type) {
  if (bytes.size() > kMaxBlobBytes) {
    throw Error(ErrorCode::too_large, "blob of " + std::to_string(bytes.size()) + " bytes exceeds 20 MB");
  }
  BlobRef ref{hash::to_hex(hash::sha256(bytes)), bytes.size(), media_type};
  std::unique_lock lock(blobs_mutex_);
  if (data_dir_.empty()) {
    memory_blobs_[ref.key] = {ref, {bytes.begin(), bytes.end()}};
    return ref;
  }
  const auto path = data_dir_ / "blobs" / ref.key;
  if (!fs::exists(path)) {
    write_atomically(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  write_atomically(data_dir_ / "blobs" / (ref.key + ".meta.json"),
                   json{{"media_type", media_type}, {"size_bytes", bytes.size()}}.dump());
  return ref;
}

std::optional<BlobRef> Store::blob_info(const std::string& key) const {
  if (key.size() != 64 || key.find_first_not_of("0123456789abcdef") != std::string::npos) {
    return std::nullopt;
  }
  std::shared_lock lock(blobs_mutex_);
  if (data_dir_.empty()) {
    auto it = memory_blobs_.find(key);
    if (it == memory_blobs_.end()) return std::nullopt;
    return it->second.first;
  }
  const auto meta = data_dir_ / "blobs" / (key + ".meta.json");
  if (!fs::exists(meta)) return std::nullopt;
  const auto j = json::parse(read_file(meta));
  return BlobRef{key, j.at("size_bytes").get<std::size_t>(), j.at("media_type").get<std::string>()};
}

std::vector<std::uint8_t> Store::get_blob(const std::string& key) const {
  if (!blob_info(key)) throw Error(ErrorCode::not_found, "unknown blob " + key);
  std::shared_lock lock(blobs_mutex_);
  if (data_dir_.empty()) return memory_blobs_.at(key).second;
  const auto raw = read_file(data_dir_ / "blobs" / key);
  return {raw.begin(), raw.end()};
}

}  // namespace qsign::store
