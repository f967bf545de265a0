#include "qsign/statcheck.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "qsign/error.hpp"

namespace qsign::statcheck {

double chi_square_survival(double statistic, int degrees_of_freedom) {
  if (degrees_of_freedom <= 0) contract_violation("chi-square needs at least one degree of freedom");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(degrees_of_freedom / 2.0, statistic / 2.0);
}

ChiSquareResult chi_square_uniformity(const qsim::ShotHistogram& hist, int bins) {
  if (bins < 2) contract_violation("chi-square needs at least two bins");
  const auto shots = hist.total();
  if (shots == 0) contract_violation("chi-square needs a non-empty histogram");

  std::vector<std::uint64_t> observed(static_cast<std::size_t>(bins), 0);
  for (const auto& [bits, count] : hist.counts) {
    std::uint64_t index = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') contract_violation("histogram key is not a bitstring: " + bits);
      index = index * 2 + static_cast<std::uint64_t>(c - '0');
    }
    if (index >= observed.size()) contract_violation("outcome " + bits + " outside the bin range");
    observed[index] += count;
  }

  const double expected = static_cast<double>(shots) / bins;
  double stat = 0.0;
  for (auto o : observed) {
    const double d = static_cast<double>(o) - expected;
    stat += d * d / expected;
  }
  return {stat, bins - 1, chi_square_survival(stat, bins - 1)};
}

double min_entropy_estimate(std::span<const int> samples) {
  if (samples.empty()) contract_violation("min-entropy needs at least one sample");
  std::unordered_map<int, std::size_t> freq;
  std::size_t top = 0;
  for (int s : samples) top = std::max(top, ++freq[s]);
  return -std::log2(static_cast<double>(top) / static_cast<double>(samples.size()));
}

BellSymmetry bell_symmetry_report(const qsim::ShotHistogram& hist_b) {
  const auto b = qsim::bell_probabilities(hist_b);
  return {b.p00, b.p11, b.p01 + b.p10};
}

}  // namespace qsign::statcheck
