#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsign/sig.hpp"

namespace qsign::store {

inline constexpr std::size_t kMaxTextChars = 4096;
inline constexpr std::size_t kMaxBlobBytes = 20u << 20;

enum class SignatureStatus { generating, completed };

struct Position {
  double x_pct = 0.0;
  double y_pct = 0.0;
  bool operator==(const Position&) const = default;
};

struct Provenance {
  std::string device;
  std::string algorithm;
  std::int64_t duration_ms = 0;
  qsim::BellVector bell;
  int q_num = 0;
  std::uint64_t rng_seed = 0;
  bool operator==(const Provenance&) const = default;
};

Provenance provenance_of(const backend::QuantumResult& qr);

struct MessageRecord {
  std::string group_id;
  std::string message_id;
  std::int64_t timestamp_ms = 0;
  std::string sender_name;
  std::string sender_handle;
  std::string text;  // sanitized
  std::optional<std::string> photo_ref;
  std::optional<Position> position;
  bool hidden = false;
  SignatureStatus signature_status = SignatureStatus::generating;
  std::optional<sig::Badge> badge;
  std::optional<Provenance> provenance;

  bool operator==(const MessageRecord&) const = default;
};

struct LeaderboardEntry {
  std::string sender_handle;
  std::size_t count = 0;
  bool operator==(const LeaderboardEntry&) const = default;
};

struct GroupSummary {
  std::string group_id;
  std::size_t message_count = 0;  // visible records only
  std::vector<LeaderboardEntry> leaderboard;
};

struct BlobRef {
  std::string key;  // lowercase hex SHA-256 of the content
  std::size_t size_bytes = 0;
  std::string media_type;
};

// Persisted encoding: one JSON document per record, snake_case field names.
void to_json(nlohmann::json& j, const MessageRecord& r);
void from_json(const nlohmann::json& j, MessageRecord& r);
std::string encode_record(const MessageRecord& r);  // canonical, 2-space indented

std::string_view to_string(SignatureStatus s);
bool is_valid_group_id(std::string_view id);
bool is_valid_message_id(std::string_view id);
std::size_t char_count(std::string_view utf8);

// Group-scoped message store. Layout under `data_dir`:
//   messages/GROUP#<group_id>/MSG#<timestamp_ms, 13 digits>#<message_id>.json
//   blobs/<sha256 hex>            raw bytes
//   blobs/<sha256 hex>.meta.json  {"media_type", "size_bytes"}
// An empty `data_dir` keeps everything in memory.
class Store {
 public:
  explicit Store(std::filesystem::path data_dir = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Returns false (and stores nothing) when the record already exists.
  bool put_phase1(const MessageRecord& record);
  // Throws not_found for unknown records. Returns false when already completed.
  bool complete_signature(const std::string& group_id, const std::string& message_id,
                          const sig::Badge& badge, const Provenance& provenance);
  std::vector<MessageRecord> list_messages(const std::string& group_id,
                                           std::optional<std::int64_t> since_ms = {}) const;
  // Includes hidden records.
  std::vector<MessageRecord> admin_list(const std::string& group_id) const;
  std::optional<MessageRecord> get(const std::string& group_id, const std::string& message_id) const;
  void soft_delete(const std::string& group_id, const std::string& message_id);
  void set_position(const std::string& group_id, const std::string& message_id, double x_pct,
                    double y_pct);

  std::vector<GroupSummary> groups() const;
  GroupSummary summary(const std::string& group_id) const;
  std::size_t record_count() const;  // all records, hidden included

  BlobRef put_blob(std::span<const std::uint8_t> bytes, const std::string& media_type);
  std::vector<std::uint8_t> get_blob(const std::string& key) const;
  std::optional<BlobRef> blob_info(const std::string& key) const;

 private:
  struct Group;
  using SortKey = std::pair<std::int64_t, std::string>;

  Group* find_group(const std::string& group_id) const;
  Group& group_for_write(const std::string& group_id);
  void persist(const MessageRecord& record) const;
  void load();
  template <typename Fn>
  void mutate(const std::string& group_id, const std::string& message_id, Fn&& fn);

  std::filesystem::path data_dir_;
  mutable std::shared_mutex groups_mutex_;
  std::map<std::string, std::unique_ptr<Group>> groups_;

  mutable std::shared_mutex blobs_mutex_;
  std::map<std::string, std::pair<BlobRef, std::vector<std::uint8_t>>> memory_blobs_;
};

}  // namespace qsign::store

namespace qsign::sig {
void to_json(nlohmann::json& j, const HslColor& c);
void from_json(const nlohmann::json& j, HslColor& c);
void to_json(nlohmann::json& j, const Badge& b);
void from_json(const nlohmann::json& j, Badge& b);
}  // namespace qsign::sig

namespace qsign::qsim {
void to_json(nlohmann::json& j, const BellVector& b);
void from_json(const nlohmann::json& j, BellVector& b);
}  // namespace qsign::qsim
