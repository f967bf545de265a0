#pragma once

// Exact state-vector simulation of the two fixed identity circuits.
//
// Bit ordering: qubit 0 is the most-significant bit of every bitstring and of
// every basis-state index. Basis index 0b10 on two qubits is |q0=1, q1=0>.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qsign::qsim {

inline constexpr int kMaxQubits = 4;

struct Hadamard {
  int target = 0;
};

struct CNot {
  int control = 0;
  int target = 0;
};

struct RotY {
  int target = 0;
  double theta = 0.0;  // radians
};

using Gate = std::variant<Hadamard, CNot, RotY>;

class StateVector {
 public:
  using Amplitude = std::complex<double>;

  // |0...0> on `num_qubits` qubits.
  explicit StateVector(int num_qubits);

  int num_qubits() const noexcept { return num_qubits_; }
  const std::vector<Amplitude>& amplitudes() const noexcept { return amplitudes_; }
  std::vector<double> probabilities() const;
  double norm_squared() const;

  // Builds a state from explicit amplitudes; the length must be a power of two
  // with 1..4 qubits. No normalization is applied.
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

 private:
  friend StateVector apply_gate(StateVector state, const Gate& gate);

  int num_qubits_;
  std::vector<Amplitude> amplitudes_;
};

struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;
  int shots = 0;
};

using RotationAngles = std::array<double, 4>;

// Outcome counts keyed by bitstring (qubit 0 first). Zero-count outcomes are
// not stored.
struct ShotHistogram {
  int num_qubits = 0;
  std::map<std::string, std::uint64_t> counts;

  std::uint64_t total() const;
  bool operator==(const ShotHistogram&) const = default;
};

struct BellVector {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;

  double sum() const { return p00 + p01 + p10 + p11; }
  bool operator==(const BellVector&) const = default;
};

// theta_i = pi * (codepoint(username[i mod len]) mod 128) / 128. Invalid UTF-8
// bytes are taken as their own code unit. Empty username gives all zeros.
RotationAngles derive_rotation_angles(std::string_view username);

StateVector apply_gate(StateVector state, const Gate& gate);

// H on every qubit, CNOT chain 0->1->2->3, then Ry(theta_i) per qubit; 100 shots.
Circuit make_rng_circuit(const RotationAngles& thetas, int shots = 100);
// H(0), CNOT(0->1); 200 shots.
Circuit make_bell_circuit(int shots = 200);

void validate(const Circuit& circuit);
StateVector simulate(const Circuit& circuit);

// Applies the circuit to |0...0> and draws `circuit.shots` Born-rule samples
// from an mt19937_64 stream seeded with `rng_seed`.
ShotHistogram run_circuit(const Circuit& circuit, std::uint64_t rng_seed);

// int(most frequent bitstring, 2) mod 1001; ties go to the lexicographically
// smallest bitstring.
int extract_qnum(const ShotHistogram& hist);

BellVector bell_probabilities(const ShotHistogram& hist);

std::string to_bitstring(std::size_t index, int num_qubits);

}  // namespace qsign::qsim
