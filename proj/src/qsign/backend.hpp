#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qsign/qsim.hpp"

namespace qsign::backend {

inline constexpr std::string_view kEmbeddedDevice = "SV1-embedded";
inline constexpr std::string_view kQuantumAlgorithm = "ToyLWE-Braket-SV1";
inline constexpr std::string_view kFallbackDevice = "local-fallback";
inline constexpr std::string_view kFallbackAlgorithm = "ToyLWE-local-fallback";

inline constexpr std::chrono::milliseconds kDefaultTimeout{30'000};
inline constexpr std::size_t kNonceSize = 32;

using qsim::BellVector;
using qsim::ShotHistogram;

struct QuantumResult {
  int q_num = 0;
  BellVector bell;
  ShotHistogram hist_a;
  ShotHistogram hist_b;
  std::string device;
  std::string algorithm;
  std::int64_t duration_ms = 0;
  std::uint64_t rng_seed = 0;

  bool is_fallback() const { return device == kFallbackDevice; }
  bool operator==(const QuantumResult&) const = default;
};

// Executes circuits. Implementations are either stateless per call or
// internally synchronized: an abandoned (timed-out) call keeps running on its
// own thread and must not disturb later calls.
class QuantumBackend {
 public:
  virtual ~QuantumBackend() = default;

  // One of "local_simulator", "remote_client", "always_fail" (or a test kind).
  virtual std::string kind() const = 0;
  virtual std::string device() const = 0;
  virtual ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                            std::stop_token stop) = 0;
};

class LocalSimulatorBackend final : public QuantumBackend {
 public:
  std::string kind() const override { return "local_simulator"; }
  std::string device() const override { return std::string(kEmbeddedDevice); }
  ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                    std::stop_token stop) override;
};

class AlwaysFailBackend final : public QuantumBackend {
 public:
  std::string kind() const override { return "always_fail"; }
  std::string device() const override { return "always-fail"; }
  ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                    std::stop_token stop) override;
};

struct RemoteBackendConfig {
  std::string endpoint;     // e.g. "http://127.0.0.1:9000/v1"
  std::string credentials;  // sent as "Authorization: Bearer ..." when non-empty
  std::string device_id = "remote-sv1";
  std::chrono::milliseconds poll_interval{100};
  std::chrono::seconds io_timeout{10};
};

// Job-submit/poll client:
//   POST {endpoint}/tasks   {num_qubits, gates, shots} -> {task_id}
//   GET  {endpoint}/tasks/{task_id} -> {status, counts}
class RemoteBackend final : public QuantumBackend {
 public:
  explicit RemoteBackend(RemoteBackendConfig config);

  std::string kind() const override { return "remote_client"; }
  std::string device() const override { return config_.device_id; }
  ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                    std::stop_token stop) override;

 private:
  RemoteBackendConfig config_;
  std::string origin_;
  std::string path_prefix_;
};

struct FallbackInputs {
  std::span<const std::uint8_t> nonce;  // 32 bytes
  std::int64_t timestamp_ms = 0;
};

// Deterministic SHAKE-256 stand-in for a quantum run:
// D = SHAKE-256(utf8(username) || be64(timestamp_ms) || nonce)[0:64],
// q_num = (D[0]*256 + D[1]) mod 1001, bell = normalize(D[2..5]).
QuantumResult fallback_result(std::string_view username, std::span<const std::uint8_t> nonce,
                              std::int64_t timestamp_ms);

// Runs the RNG circuit (seeded by `rng_seed`) then the Bell circuit (seeded by
// derive_bell_seed(rng_seed)) on `backend`, racing both against `timeout`.
// Never throws for backend failure; a timeout, exception, or malformed result
// yields fallback_result() with the measured duration.
QuantumResult execute_pipeline(std::string_view username,
                               const std::shared_ptr<QuantumBackend>& backend,
                               std::chrono::milliseconds timeout, std::uint64_t rng_seed,
                               const FallbackInputs& fallback);

std::uint64_t derive_bell_seed(std::uint64_t rng_seed);

// Remote wire format helpers (shared with test fakes).
nlohmann::json circuit_to_json(const qsim::Circuit& circuit);
qsim::Circuit circuit_from_json(const nlohmann::json& j);
ShotHistogram histogram_from_counts(const nlohmann::json& counts, int num_qubits);

// Checks the histogram is a plausible result for `circuit`.
bool histogram_matches(const ShotHistogram& hist, const qsim::Circuit& circuit);

}  // namespace qsign::backend
