#pragma once

#include <atomic>
#include <chrono>
#include <complex>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsign/backend.hpp"
#include "qsign/qsim.hpp"

namespace qsign::testing {

inline std::filesystem::path golden_dir() { return QSIGN_GOLDEN_DIR; }

inline nlohmann::json read_golden(const std::string& name) {
  std::ifstream in(golden_dir() / name);
  return nlohmann::json::parse(in);
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qsign-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};


// Builds bot-platform update JSON for tests.
struct UpdateBuilder {
  struct Entity {
    std::string type;
    std::int64_t offset;
    std::int64_t length;
  };

  std::int64_t update_id = 1;
  std::int64_t message_id = 1;
  std::int64_t date_s = 1700000000;
  std::int64_t chat_id = -100123;
  std::string first_name = "Alice";
  std::string username = "alice";
  std::optional<std::string> text;
  std::vector<Entity> entities;
  std::optional<std::string> caption;
  std::vector<Entity> caption_entities;
  std::vector<std::pair<std::string, std::int64_t>> photos;

  nlohmann::json json() const {
    nlohmann::json m = {{"message_id", message_id},
                        {"date", date_s},
                        {"chat", {{"id", chat_id}, {"type", "supergroup"}}},
                        {"from", {{"id", 42}, {"is_bot", false}, {"first_name", first_name}}}};
    if (!username.empty()) m["from"]["username"] = username;
    auto ents = [](const std::vector<Entity>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& e : v) a.push_back({{"type", e.type}, {"offset", e.offset}, {"length", e.length}});
      return a;
    };
    if (text) m["text"] = *text;
    if (!entities.empty()) m["entities"] = ents(entities);
    if (caption) m["caption"] = *caption;
    if (!caption_entities.empty()) m["caption_entities"] = ents(caption_entities);
    if (!photos.empty()) {
      m["photo"] = nlohmann::json::array();
      for (const auto& [id, size] : photos) {
        m["photo"].push_back({{"file_id", id}, {"file_unique_id", id + "u"}, {"file_size", size},
                              {"width", 90}, {"height", 90}});
      }
    }
    return {{"update_id", update_id}, {"message", m}};
  }
  std::string body() const { return json().dump(); }
};

// Text with a well-formed mention of `handle` after `prefix` (ASCII prefix).
inline UpdateBuilder mention_update(std::int64_t id, const std::string& handle, const std::string& prefix = "hi ",
                                    const std::string& suffix = "") {
  UpdateBuilder u;
  u.update_id = id;
  u.message_id = id;
  u.text = prefix + "@" + handle + suffix;
  u.entities.push_back({"mention", static_cast<std::int64_t>(prefix.size()),
                        static_cast<std::int64_t>(handle.size() + 1)});
  return u;
}

// Blocks until released (or the stop token fires, or a safety cap passes).
class HangingBackend final : public backend::QuantumBackend {
 public:
  explicit HangingBackend(std::chrono::milliseconds cap = std::chrono::seconds(20),
                          std::string device = "hanging-device")
      : cap_(cap), device_(std::move(device)) {}

  std::string kind() const override { return "hanging"; }
  std::string device() const override { return device_; }

  qsim::ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t seed, std::stop_token stop) override {
    ++calls_;
    std::unique_lock lock(mutex_);
    const auto deadline = std::chrono::steady_clock::now() + cap_;
    cv_.wait_until(lock, deadline, [&] { return released_ || stop.stop_requested(); });
    if (!released_) throw std::runtime_error("abandoned");
    lock.unlock();
    return qsim::run_circuit(circuit, seed);
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      released_ = true;
    }
    cv_.notify_all();
  }

  int calls() const { return calls_; }

 private:
  std::chrono::milliseconds cap_;
  std::string device_;
  std::mutex mutex_;
  std::condition_variable_any cv_;
  bool released_ = false;
  std::atomic<int> calls_{0};
};

// Sleeps a fixed time, then delegates to the local simulator.
class SlowBackend final : public backend::QuantumBackend {
 public:
  explicit SlowBackend(std::chrono::milliseconds delay) : delay_(delay) {}
  std::string kind() const override { return "slow"; }
  std::string device() const override { return std::string(backend::kEmbeddedDevice); }
  qsim::ShotHistogram run(const qsim::Circuit& circuit, std::uint64_t seed, std::stop_token) override {
    std::this_thread::sleep_for(delay_);
    return qsim::run_circuit(circuit, seed);
  }

 private:
  std::chrono::milliseconds delay_;
};

// Dense-matrix reference simulator: builds each gate's full 2^n x 2^n unitary
// by Kronecker products / explicit permutation and multiplies. Shares no code
// with qsim's in-place pair updates.
namespace oracle {

using C = std::complex<double>;
using Matrix = std::vector<std::vector<C>>;

inline Matrix identity(std::size_t n) {
  Matrix m(n, std::vector<C>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.size() * b.size(), std::vector<C>(a.size() * b.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k)
        for (std::size_t l = 0; l < b.size(); ++l) out[i * b.size() + k][j * b.size() + l] = a[i][j] * b[k][l];
  return out;
}

// Single-qubit operator on `target`; qubit 0 is the leftmost Kronecker factor.
inline Matrix lift(const Matrix& u, int target, int n) {
  Matrix out = {{1.0}};
  for (int q = 0; q < n; ++q) out = kron(out, q == target ? u : identity(2));
  return out;
}

inline Matrix cnot(int control, int target, int n) {
  const std::size_t dim = std::size_t{1} << n;
  Matrix m(dim, std::vector<C>(dim, 0.0));
  for (std::size_t col = 0; col < dim; ++col) {
    // Read bits MSB-first as a string to get qubit values.
    std::vector<int> bits(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) bits[static_cast<std::size_t>(q)] = static_cast<int>((col >> (n - 1 - q)) & 1u);
    if (bits[static_cast<std::size_t>(control)]) bits[static_cast<std::size_t>(target)] ^= 1;
    std::size_t row = 0;
    for (int q = 0; q < n; ++q) row = row * 2 + static_cast<std::size_t>(bits[static_cast<std::size_t>(q)]);
    m[row][col] = 1.0;
  }
  return m;
}

inline std::vector<C> mat_vec(const Matrix& m, const std::vector<C>& v) {
  std::vector<C> out(v.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline std::vector<C> run(const qsim::Circuit& c) {
  const int n = c.num_qubits;
  std::vector<C> state(std::size_t{1} << n, 0.0);
  state[0] = 1.0;
  const double r = 1.0 / std::sqrt(2.0);
  for (const auto& g : c.gates) {
    Matrix m;
    if (auto* h = std::get_if<qsim::Hadamard>(&g)) {
      m = lift({{r, r}, {r, -r}}, h->target, n);
    } else if (auto* x = std::get_if<qsim::CNot>(&g)) {
      m = cnot(x->control, x->target, n);
    } else {
      const auto& ry = std::get<qsim::RotY>(g);
      const double cs = std::cos(ry.theta / 2), sn = std::sin(ry.theta / 2);
      m = lift({{cs, -sn}, {sn, cs}}, ry.target, n);
    }
    state = mat_vec(m, state);
  }
  return state;
}

}  // namespace oracle
}  // namespace qsign::testing
