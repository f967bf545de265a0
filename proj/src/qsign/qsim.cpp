#include "qsign/qsim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "qsign/error.hpp"
#include "qsign/text.hpp"

namespace qsign::qsim {
namespace {

std::size_t qubit_mask(int qubit, int num_qubits) {
  return std::size_t{1} << (num_qubits - 1 - qubit);
}

void check_qubit(int qubit, int num_qubits, const char* role) {
  if (qubit < 0 || qubit >= num_qubits) {
    contract_violation(std::string(role) + " qubit " + std::to_string(qubit) +
                       " out of range for " + std::to_string(num_qubits) + " qubits");
  }
}

void apply_single(std::vector<std::complex<double>>& amps, int target, int num_qubits,
                  const std::array<std::complex<double>, 4>& m) {
  const std::size_t mask = qubit_mask(target, num_qubits);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const auto a0 = amps[i];
    const auto a1 = amps[i | mask];
    amps[i] = m[0] * a0 + m[1] * a1;
    amps[i | mask] = m[2] * a0 + m[3] * a1;
  }
}

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    contract_violation("state vector supports 1.." + std::to_string(kMaxQubits) + " qubits");
  }
  amplitudes_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  int n = 0;
  while ((std::size_t{1} << n) < amplitudes.size()) ++n;
  if ((std::size_t{1} << n) != amplitudes.size() || n < 1 || n > kMaxQubits) {
    contract_violation("amplitude count must be 2^n with n in [1,4]");
  }
  StateVector sv(n);
  sv.amplitudes_ = std::move(amplitudes);
  return sv;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amplitudes_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes_[i]);
  return p;
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const auto& a : amplitudes_) acc += std::norm(a);
  return acc;
}

std::uint64_t ShotHistogram::total() const {
  std::uint64_t acc = 0;
  for (const auto& [_, c] : counts) acc += c;
  return acc;
}

RotationAngles derive_rotation_angles(std::string_view username) {
  RotationAngles thetas{};
  const auto cps = text::decode_utf8(username);
  if (cps.empty()) return thetas;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const auto code = cps[i % cps.size()] % 128u;
    thetas[i] = std::numbers::pi * static_cast<double>(code) / 128.0;
  }
  return thetas;
}

StateVector apply_gate(StateVector state, const Gate& gate) {
  const int n = state.num_qubits_;
  auto& amps = state.amplitudes_;
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, Hadamard>) {
          check_qubit(g.target, n, "target");
          const double r = 1.0 / std::numbers::sqrt2;
          apply_single(amps, g.target, n, {r, r, r, -r});
        } else if constexpr (std::is_same_v<G, CNot>) {
          check_qubit(g.control, n, "control");
          check_qubit(g.target, n, "target");
          if (g.control == g.target) contract_violation("CNOT control equals target");
          const std::size_t cmask = qubit_mask(g.control, n);
          const std::size_t tmask = qubit_mask(g.target, n);
          for (std::size_t i = 0; i < amps.size(); ++i) {
            if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
          }
        } else {
          check_qubit(g.target, n, "target");
          if (!std::isfinite(g.theta)) contract_violation("Ry angle must be finite");
          const double c = std::cos(g.theta / 2.0);
          const double s = std::sin(g.theta / 2.0);
          apply_single(amps, g.target, n, {c, -s, s, c});
        }
      },
      gate);
  return state;
}

Circuit make_rng_circuit(const RotationAngles& thetas, int shots) {
  Circuit c{4, {}, shots};
  for (int q = 0; q < 4; ++q) c.gates.emplace_back(Hadamard{q});
  for (int q = 0; q < 3; ++q) c.gates.emplace_back(CNot{q, q + 1});
  for (int q = 0; q < 4; ++q) c.gates.emplace_back(RotY{q, thetas[static_cast<std::size_t>(q)]});
  return c;
}

Circuit make_bell_circuit(int shots) {
  return Circuit{2, {Hadamard{0}, CNot{0, 1}}, shots};
}

void validate(const Circuit& circuit) {
  if (circuit.num_qubits < 1 || circuit.num_qubits > kMaxQubits) {
    contract_violation("circuit qubit count out of range");
  }
  if (circuit.shots <= 0) contract_violation("circuit shots must be positive");
}

StateVector simulate(const Circuit& circuit) {
  validate(circuit);
  StateVector state(circuit.num_qubits);
  for (const auto& g : circuit.gates) state = apply_gate(std::move(state), g);
  return state;
}

ShotHistogram run_circuit(const Circuit& circuit, std::uint64_t rng_seed) {
  const auto probs = simulate(circuit).probabilities();
  std::vector<double> cumulative(probs.size());
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cumulative[i] = acc;
    if (probs[i] > 0.0) last_nonzero = i;
  }

  // Uniform doubles built from the top 53 bits so the stream is identical on
  // every standard library (std::uniform_real_distribution is not).
  std::mt19937_64 rng(rng_seed);
  std::vector<std::uint64_t> tally(probs.size(), 0);
  for (int s = 0; s < circuit.shots; ++s) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * acc;
    std::size_t idx = last_nonzero;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i] && probs[i] > 0.0) {
        idx = i;
        break;
      }
    }
    ++tally[idx];
  }

  ShotHistogram hist{circuit.num_qubits, {}};
  for (std::size_t i = 0; i < tally.size(); ++i) {
    if (tally[i] > 0) hist.counts.emplace(to_bitstring(i, circuit.num_qubits), tally[i]);
  }
  return hist;
}

int extract_qnum(const ShotHistogram& hist) {
  const std::string* top = nullptr;
  std::uint64_t best = 0;
  // std::map iterates in lexicographic order, so strict '>' keeps the
  // smallest bitstring on ties.
  for (const auto& [bits, count] : hist.counts) {
    if (count > best) {
      best = count;
      top = &bits;
    }
  }
  if (top == nullptr) contract_violation("cannot extract q_num from an empty histogram");
  std::uint64_t value = 0;
  for (char ch : *top) {
    if (ch != '0' && ch != '1') contract_violation("histogram key is not a bitstring: " + *top);
    value = value * 2 + static_cast<std::uint64_t>(ch - '0');
  }
  return static_cast<int>(value % 1001);
}

BellVector bell_probabilities(const ShotHistogram& hist) {
  const auto shots = hist.total();
  if (shots == 0) contract_violation("Bell probabilities need at least one shot");
  std::array<std::uint64_t, 4> c{};
  for (const auto& [bits, count] : hist.counts) {
    if (bits == "00") c[0] = count;
    else if (bits == "01") c[1] = count;
    else if (bits == "10") c[2] = count;
    else if (bits == "11") c[3] = count;
    else contract_violation("Bell histogram key must be a 2-bit string: " + bits);
  }
  const auto d = static_cast<double>(shots);
  return {static_cast<double>(c[0]) / d, static_cast<double>(c[1]) / d,
          static_cast<double>(c[2]) / d, static_cast<double>(c[3]) / d};
}

std::string to_bitstring(std::size_t index, int num_qubits) {
  std::string bits(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q) {
    if (index & qubit_mask(q, num_qubits)) bits[static_cast<std::size_t>(q)] = '1';
  }
  return bits;
}

}  // namespace qsign::qsim
