#pragma once

#include <cstdint>
#include <span>

#include "qsign/qsim.hpp"

namespace qsign::statcheck {

struct ChiSquareResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
};

// Pearson chi-square of `hist` against the uniform distribution over `bins`
// outcomes (bitstrings read as integers, qubit 0 most significant).
ChiSquareResult chi_square_uniformity(const qsim::ShotHistogram& hist, int bins);

// Upper-tail probability of the chi-square distribution.
double chi_square_survival(double statistic, int degrees_of_freedom);

// Most-common-value estimate: -log2(max empirical frequency).
double min_entropy_estimate(std::span<const int> samples);

struct BellSymmetry {
  double p00 = 0.0;
  double p11 = 0.0;
  double cross_mass = 0.0;  // p01 + p10
};

BellSymmetry bell_symmetry_report(const qsim::ShotHistogram& hist_b);

}  // namespace qsign::statcheck
