#include "qsign/backend.hpp"

#include <condition_variable>
#include <mutex>
#include <optional>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "qsign/error.hpp"
#include "qsign/hash.hpp"

namespace qsign::backend {

using nlohmann::json;

ShotHistogram LocalSimulatorBackend::run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                                         std::stop_token) {
  return qsim::run_circuit(circuit, rng_seed);
}

ShotHistogram AlwaysFailBackend::run(const qsim::Circuit&, std::uint64_t, std::stop_token) {
  throw Error(ErrorCode::internal, "always_fail backend refuses every task");
}

RemoteBackend::RemoteBackend(RemoteBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) contract_violation("remote endpoint must be an absolute URL");
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.endpoint.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

ShotHistogram RemoteBackend::run(const qsim::Circuit& circuit, std::uint64_t rng_seed,
                                 std::stop_token stop) {
  httplib::Client client(origin_);
  client.set_connection_timeout(config_.io_timeout);
  client.set_read_timeout(config_.io_timeout);
  client.set_write_timeout(config_.io_timeout);
  httplib::Headers headers;
  if (!config_.credentials.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.credentials);
  }

  auto body = circuit_to_json(circuit);
  body["seed"] = rng_seed;
  auto submitted = client.Post(path_prefix_ + "/tasks", headers, body.dump(), "application/json");
  if (!submitted || submitted->status / 100 != 2) {
    throw Error(ErrorCode::io, "remote backend rejected task submission");
  }
  const auto task_id = json::parse(submitted->body).at("task_id").get<std::string>();

  while (!stop.stop_requested()) {
    auto polled = client.Get(path_prefix_ + "/tasks/" + task_id, headers);
    if (!polled || polled->status / 100 != 2) {
      throw Error(ErrorCode::io, "remote backend poll failed for task " + task_id);
    }
    const auto reply = json::parse(polled->body);
    const auto status = reply.at("status").get<std::string>();
    if (status == "completed") return histogram_from_counts(reply.at("counts"), circuit.num_qubits);
    if (status == "failed") throw Error(ErrorCode::io, "remote task " + task_id + " failed");
    if (status != "queued" && status != "running") {
      throw Error(ErrorCode::parse, "remote task has unknown status '" + status + "'");
    }
    std::this_thread::sleep_for(config_.poll_interval);
  }
  throw Error(ErrorCode::io, "remote task " + task_id + " abandoned");
}

QuantumResult fallback_result(std::string_view username, std::span<const std::uint8_t> nonce,
                              std::int64_t timestamp_ms) {
  hash::Bytes input;
  hash::append(input, username);
  hash::append_be64(input, static_cast<std::uint64_t>(timestamp_ms));
  input.insert(input.end(), nonce.begin(), nonce.end());
  const auto d = hash::shake256(input, 64);

  QuantumResult r;
  r.q_num = (d[0] * 256 + d[1]) % 1001;
  const double total = static_cast<double>(d[2]) + d[3] + d[4] + d[5];
  if (total == 0.0) {
    r.bell = {0.5, 0.0, 0.0, 0.5};
  } else {
    r.bell = {d[2] / total, d[3] / total, d[4] / total, d[5] / total};
  }
  r.hist_a.num_qubits = 4;
  r.hist_b.num_qubits = 2;
  r.device = kFallbackDevice;
  r.algorithm = kFallbackAlgorithm;
  return r;
}

std::uint64_t derive_bell_seed(std::uint64_t rng_seed) {
  // splitmix64 finalizer
  std::uint64_t z = rng_seed + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

struct RaceState {
  std::mutex mutex;
  std::condition_variable cv;
  bool done = false;
  std::optional<std::pair<ShotHistogram, ShotHistogram>> histograms;
  std::string failure;
};

}  // namespace

QuantumResult execute_pipeline(std::string_view username,
                               const std::shared_ptr<QuantumBackend>& backend,
                               std::chrono::milliseconds timeout, std::uint64_t rng_seed,
                               const FallbackInputs& fallback) {
  if (timeout <= std::chrono::milliseconds::zero()) contract_violation("timeout must be positive");
  const auto started = std::chrono::steady_clock::now();
  const auto rng_circuit = qsim::make_rng_circuit(qsim::derive_rotation_angles(username));
  const auto bell_circuit = qsim::make_bell_circuit();

  auto state = std::make_shared<RaceState>();
  std::stop_source stop;
  if (backend) {
    // Detached so a hanging backend can be abandoned; it owns shared copies of
    // everything it touches.
    std::thread([state, backend, rng_circuit, bell_circuit, rng_seed, token = stop.get_token()] {
      std::optional<std::pair<ShotHistogram, ShotHistogram>> out;
      std::string failure;
      try {
        auto a = backend->run(rng_circuit, rng_seed, token);
        auto b = backend->run(bell_circuit, derive_bell_seed(rng_seed), token);
        out.emplace(std::move(a), std::move(b));
      } catch (const std::exception& e) {
        failure = e.what();
      } catch (...) {
        failure = "unknown backend exception";
      }
      std::lock_guard lock(state->mutex);
      state->histograms = std::move(out);
      state->failure = std::move(failure);
      state->done = true;
      state->cv.notify_all();
    }).detach();
  }

  std::optional<std::pair<ShotHistogram, ShotHistogram>> histograms;
  std::string reason = backend ? "timeout" : "no backend configured";
  {
    std::unique_lock lock(state->mutex);
    if (backend && state->cv.wait_for(lock, timeout, [&] { return state->done; })) {
      histograms = state->histograms;
      reason = state->failure;
    }
  }
  stop.request_stop();

  const auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 started)
        .count();
  };

  if (histograms && histogram_matches(histograms->first, rng_circuit) &&
      histograms->second.total() > 0 && histogram_matches(histograms->second, bell_circuit)) {
    QuantumResult r;
    r.q_num = qsim::extract_qnum(histograms->first);
    r.bell = qsim::bell_probabilities(histograms->second);
    r.hist_a = std::move(histograms->first);
    r.hist_b = std::move(histograms->second);
    r.device = backend->device();
    r.algorithm = kQuantumAlgorithm;
    r.duration_ms = elapsed();
    r.rng_seed = rng_seed;
    return r;
  }
  if (histograms) reason = "backend returned a malformed histogram";

  spdlog::warn("quantum backend {} unavailable ({}); using local fallback",
               backend ? backend->kind() : "none", reason);
  auto r = fallback_result(username, fallback.nonce, fallback.timestamp_ms);
  r.duration_ms = elapsed();
  r.rng_seed = rng_seed;
  return r;
}

json circuit_to_json(const qsim::Circuit& circuit) {
  json gates = json::array();
  for (const auto& g : circuit.gates) {
    std::visit(
        [&](const auto& gate) {
          using G = std::decay_t<decltype(gate)>;
          if constexpr (std::is_same_v<G, qsim::Hadamard>) {
            gates.push_back({{"kind", "h"}, {"target", gate.target}});
          } else if constexpr (std::is_same_v<G, qsim::CNot>) {
            gates.push_back({{"kind", "cnot"}, {"target", gate.target}, {"control", gate.control}});
          } else {
            gates.push_back({{"kind", "ry"}, {"target", gate.target}, {"theta", gate.theta}});
          }
        },
        g);
  }
  return {{"num_qubits", circuit.num_qubits}, {"gates", gates}, {"shots", circuit.shots}};
}

qsim::Circuit circuit_from_json(const json& j) {
  qsim::Circuit c;
  try {
    c.num_qubits = j.at("num_qubits").get<int>();
    c.shots = j.at("shots").get<int>();
    for (const auto& g : j.at("gates")) {
      const auto kind = g.at("kind").get<std::string>();
      const int target = g.at("target").get<int>();
      if (kind == "h") {
        c.gates.emplace_back(qsim::Hadamard{target});
      } else if (kind == "cnot") {
        c.gates.emplace_back(qsim::CNot{g.at("control").get<int>(), target});
      } else if (kind == "ry") {
        c.gates.emplace_back(qsim::RotY{target, g.at("theta").get<double>()});
      } else {
        throw Error(ErrorCode::parse, "unknown gate kind '" + kind + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed circuit: ") + e.what());
  }
  qsim::validate(c);
  return c;
}

ShotHistogram histogram_from_counts(const json& counts, int num_qubits) {
  if (!counts.is_object()) throw Error(ErrorCode::parse, "counts must be an object");
  ShotHistogram hist{num_qubits, {}};
  for (const auto& [bits, value] : counts.items()) {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
      throw Error(ErrorCode::parse, "count for '" + bits + "' is not a non-negative integer");
    }
    const auto n = value.get<std::uint64_t>();
    if (n > 0) hist.counts[bits] += n;
  }
  return hist;
}

bool histogram_matches(const ShotHistogram& hist, const qsim::Circuit& circuit) {
  if (hist.num_qubits != circuit.num_qubits) return false;
  if (hist.total() != static_cast<std::uint64_t>(circuit.shots)) return false;
  for (const auto& [bits, _] : hist.counts) {
    if (bits.size() != static_cast<std::size_t>(circuit.num_qubits)) return false;
    if (bits.find_first_not_of("01") != std::string::npos) return false;
  }
  return true;
}

}  // namespace qsign::backend
