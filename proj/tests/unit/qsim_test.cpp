#include "qsign/qsim.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qsign/error.hpp"
#include "test_support.hpp"

namespace qsign::qsim {
namespace {

constexpr double kTol = 1e-12;

TEST(RotationAngles, UniformUsername) {
  const auto t = derive_rotation_angles("AAAA");
  for (double th : t) EXPECT_NEAR(th, std::numbers::pi * 65.0 / 128.0, 1e-15);
  EXPECT_NEAR(t[0], 1.59534, 1e-5);
}

TEST(RotationAngles, EmptyUsernameIsZero) {
  for (double th : derive_rotation_angles("")) EXPECT_EQ(th, 0.0);
}

TEST(RotationAngles, ShortUsernameCycles) {
  const auto t = derive_rotation_angles("ab");
  const double a = std::numbers::pi * 97 / 128, b = std::numbers::pi * 98 / 128;
  EXPECT_DOUBLE_EQ(t[0], a);
  EXPECT_DOUBLE_EQ(t[1], b);
  EXPECT_DOUBLE_EQ(t[2], a);
  EXPECT_DOUBLE_EQ(t[3], b);
}

TEST(RotationAngles, NonAsciiUsesCodePointMod128) {
  // U+00EB (235) -> 107, U+1F680 (128640) -> 0
  const auto t = derive_rotation_angles("\xC3\xAB\xF0\x9F\x9A\x80");
  EXPECT_DOUBLE_EQ(t[0], std::numbers::pi * 107 / 128);
  EXPECT_DOUBLE_EQ(t[1], 0.0);
  EXPECT_DOUBLE_EQ(t[2], std::numbers::pi * 107 / 128);
}

TEST(RotationAngles, AlwaysOnTheGrid) {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::string name;
    const int len = static_cast<int>(rng() % 12);
    for (int k = 0; k < len; ++k) name.push_back(static_cast<char>(32 + rng() % 95));
    for (double th : derive_rotation_angles(name)) {
      const double k = th * 128.0 / std::numbers::pi;
      EXPECT_NEAR(k, std::round(k), 1e-9);
      EXPECT_GE(th, 0.0);
      EXPECT_LT(th, std::numbers::pi);
    }
  }
}

TEST(ApplyGate, HadamardOnZero) {
  auto s = apply_gate(StateVector(1), Hadamard{0});
  EXPECT_NEAR(s.amplitudes()[0].real(), 1 / std::sqrt(2.0), kTol);
  EXPECT_NEAR(s.amplitudes()[1].real(), 1 / std::sqrt(2.0), kTol);
}

TEST(ApplyGate, CnotTruthTableUsesQubitZeroAsMsb) {
  // |10> : index 0b10
  auto s = StateVector::from_amplitudes({0, 0, 1, 0});
  s = apply_gate(std::move(s), CNot{0, 1});
  EXPECT_EQ(s.amplitudes()[3], std::complex<double>(1, 0));
  EXPECT_EQ(s.amplitudes()[2], std::complex<double>(0, 0));
  // control clear: unchanged
  auto t = apply_gate(StateVector::from_amplitudes({0, 1, 0, 0}), CNot{0, 1});
  EXPECT_EQ(t.amplitudes()[1], std::complex<double>(1, 0));
}

TEST(ApplyGate, RyZeroIsIdentity) {
  auto s = apply_gate(apply_gate(StateVector(2), Hadamard{1}), CNot{1, 0});
  const auto before = s.amplitudes();
  s = apply_gate(std::move(s), RotY{0, 0.0});
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(std::abs(s.amplitudes()[i] - before[i]), 0.0, kTol);
}

TEST(ApplyGate, IndexErrors) {
  EXPECT_THROW(apply_gate(StateVector(2), Hadamard{2}), Error);
  EXPECT_THROW(apply_gate(StateVector(2), CNot{0, 0}), Error);
  EXPECT_THROW(apply_gate(StateVector(2), CNot{-1, 1}), Error);
  EXPECT_THROW(apply_gate(StateVector(2), RotY{0, NAN}), Error);
  EXPECT_THROW(StateVector(5), Error);
}

StateVector random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::vector<std::complex<double>> a(std::size_t{1} << n);
  double norm = 0;
  for (auto& x : a) {
    x = {nd(rng), nd(rng)};
    norm += std::norm(x);
  }
  for (auto& x : a) x /= std::sqrt(norm);
  return StateVector::from_amplitudes(a);
}

Gate random_gate(std::mt19937_64& rng, int n) {
  const int t = static_cast<int>(rng() % n);
  switch (rng() % 3) {
    case 0: return Hadamard{t};
    case 1: {
      int c = static_cast<int>(rng() % n);
      if (c == t) c = (t + 1) % n;
      return CNot{c, t};
    }
    default: return RotY{t, std::uniform_real_distribution<double>(0, std::numbers::pi)(rng)};
  }
}

TEST(Properties, NormPreservedAfterEveryGate) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    auto s = random_state(rng, n);
    for (int k = 0; k < 20; ++k) {
      s = apply_gate(std::move(s), random_gate(rng, n));
      ASSERT_NEAR(s.norm_squared(), 1.0, kTol);
    }
  }
}

TEST(Properties, HadamardAndCnotAreInvolutions) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const auto s = random_state(rng, n);
    Gate g = rng() % 2 ? Gate{Hadamard{static_cast<int>(rng() % n)}} : Gate{CNot{0, n - 1}};
    const auto twice = apply_gate(apply_gate(s, g), g);
    for (std::size_t i = 0; i < s.amplitudes().size(); ++i) {
      ASSERT_NEAR(std::abs(twice.amplitudes()[i] - s.amplitudes()[i]), 0.0, kTol);
    }
  }
}

TEST(Circuits, ShapesMatchTheFixedDefinitions) {
  const auto a = make_rng_circuit({0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(a.num_qubits, 4);
  EXPECT_EQ(a.shots, 100);
  ASSERT_EQ(a.gates.size(), 11u);
  for (int q = 0; q < 4; ++q) EXPECT_EQ(std::get<Hadamard>(a.gates[q]).target, q);
  for (int q = 0; q < 3; ++q) {
    EXPECT_EQ(std::get<CNot>(a.gates[4 + q]).control, q);
    EXPECT_EQ(std::get<CNot>(a.gates[4 + q]).target, q + 1);
  }
  EXPECT_DOUBLE_EQ(std::get<RotY>(a.gates[10]).theta, 0.4);
  const auto b = make_bell_circuit();
  EXPECT_EQ(b.num_qubits, 2);
  EXPECT_EQ(b.shots, 200);
  EXPECT_EQ(b.gates.size(), 2u);
}

TEST(Circuits, BellAmplitudesExact) {
  const auto s = simulate(make_bell_circuit());
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(s.amplitudes()[0] - r), 0.0, kTol);
  EXPECT_NEAR(std::abs(s.amplitudes()[1]), 0.0, kTol);
  EXPECT_NEAR(std::abs(s.amplitudes()[2]), 0.0, kTol);
  EXPECT_NEAR(std::abs(s.amplitudes()[3] - r), 0.0, kTol);
}

TEST(Circuits, RngCircuitThetaZeroIsUniform) {
  const auto p = simulate(make_rng_circuit({0, 0, 0, 0})).probabilities();
  for (double x : p) EXPECT_NEAR(x, 1.0 / 16.0, kTol);
}

TEST(Circuits, MatchesDenseMatrixOracle) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::string name;
    for (int k = 0; k < 4; ++k) name.push_back(static_cast<char>(33 + rng() % 90));
    const auto c = make_rng_circuit(derive_rotation_angles(name));
    const auto expect = testing::oracle::run(c);
    const auto got = simulate(c).amplitudes();
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(std::abs(got[i] - expect[i]), 0.0, kTol) << name;
  }
}

TEST(RunCircuit, BellSamplesOnlyCorrelatedOutcomes) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto h = run_circuit(make_bell_circuit(), seed);
    EXPECT_EQ(h.total(), 200u);
    EXPECT_FALSE(h.counts.contains("01"));
    EXPECT_FALSE(h.counts.contains("10"));
  }
}

TEST(RunCircuit, Deterministic) {
  const auto c = make_rng_circuit(derive_rotation_angles("carol"));
  EXPECT_EQ(run_circuit(c, 99), run_circuit(c, 99));
  EXPECT_NE(run_circuit(c, 99), run_circuit(c, 100));
}

TEST(RunCircuit, ThetaZeroLargeRunCoversAllOutcomes) {
  const auto h = run_circuit(make_rng_circuit({0, 0, 0, 0}, 100000), 2024);
  ASSERT_EQ(h.counts.size(), 16u);
  for (const auto& [bits, n] : h.counts) {
    EXPECT_EQ(bits.size(), 4u);
    EXPECT_NEAR(static_cast<double>(n), 6250.0, 6 * std::sqrt(6250.0 * 15 / 16));
  }
}

TEST(RunCircuit, BellGoldenHistogram) {
  const auto golden = testing::read_golden("bell_histogram.json");
  const auto h = run_circuit(make_bell_circuit(), golden.at("seed").get<std::uint64_t>());
  for (const auto& [bits, n] : golden.at("counts").items()) {
    EXPECT_EQ(h.counts.at(bits), n.get<std::uint64_t>()) << bits;
  }
  EXPECT_EQ(h.counts.size(), golden.at("counts").size());
}

TEST(ExtractQnum, Examples) {
  EXPECT_EQ(extract_qnum({4, {{"1111", 60}, {"0000", 40}}}), 15);
  EXPECT_EQ(extract_qnum({4, {{"0000", 100}}}), 0);
  EXPECT_EQ(extract_qnum({4, {{"0101", 50}, {"1010", 50}}}), 5);
  EXPECT_THROW(extract_qnum({4, {}}), Error);
}

TEST(ExtractQnum, RangeAndScaleInvariance) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    ShotHistogram h{4, {}};
    const int outcomes = 1 + static_cast<int>(rng() % 16);
    for (int k = 0; k < outcomes; ++k) h.counts[to_bitstring(rng() % 16, 4)] += 1 + rng() % 20;
    const int q = extract_qnum(h);
    ASSERT_GE(q, 0);
    ASSERT_LE(q, 1000);
    auto scaled = h;
    const auto factor = 1 + rng() % 7;
    for (auto& [_, n] : scaled.counts) n *= factor;
    ASSERT_EQ(extract_qnum(scaled), q);
  }
}

TEST(BellProbabilities, Examples) {
  EXPECT_EQ(bell_probabilities({2, {{"00", 100}, {"11", 100}}}), (BellVector{0.5, 0, 0, 0.5}));
  EXPECT_EQ(bell_probabilities({2, {{"00", 200}}}), (BellVector{1, 0, 0, 0}));
  const auto b = bell_probabilities({2, {{"00", 98}, {"11", 102}}});
  EXPECT_DOUBLE_EQ(b.p00, 0.49);
  EXPECT_DOUBLE_EQ(b.p11, 0.51);
  EXPECT_NEAR(b.sum(), 1.0, kTol);
  EXPECT_THROW(bell_probabilities({2, {}}), Error);
}

}  // namespace
}  // namespace qsign::qsim
