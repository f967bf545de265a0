#pragma once

// Operator drivers behind the CLI: one-shot badge issue, randomness report,
// and stored-record verification. All outputs are deterministic functions of
// their inputs unless timing is requested.

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qsign/hash.hpp"
#include "qsign/store.hpp"

namespace qsign::offline {

struct BadgeRequest {
  std::string username;
  std::string text;
  std::uint64_t seed = 0;
  std::optional<hash::Bytes> nonce;  // default: derived from seed
  std::int64_t timestamp_ms = 0;
  std::string backend = "local";     // local | fail
  std::int64_t timeout_ms = 30'000;
  bool include_timing = false;
};

// SHAKE-256("qsign/offline-nonce" || be64(seed))[0:32]
hash::Bytes nonce_from_seed(std::uint64_t seed);

struct BadgeOutcome {
  nlohmann::json report;
  store::MessageRecord record;  // completed record, group "offline"
};

BadgeOutcome issue_badge(const BadgeRequest& request);

struct StatsRequest {
  int shots = 100'000;
  std::uint64_t seed = 0;
  int samples = 1000;
  std::string username;  // seeds the RNG circuit rotations; empty = theta 0
};

nlohmann::json stats_report(const StatsRequest& request);
std::string stats_text(const nlohmann::json& report);

// Recomputes the badge of a completed record from (sender_handle, text,
// q_num, nonce, bell). Throws contract_violation for incomplete records.
nlohmann::json verify_record(const store::MessageRecord& record);

}  // namespace qsign::offline
