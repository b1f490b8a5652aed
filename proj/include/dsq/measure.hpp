#pragma once

#include "dsq/statespace.hpp"

#include <cstdint>
#include <random>

namespace dsq {

/// Threshold fluorescence detection. Counts are Poisson with mean
/// lambda_bright for F=1 and lambda_dark for F=0; before counting, an ion
/// may be off-resonantly pumped into the other manifold.
struct DetectorModel {
  double lambda_bright = 10.0;
  double lambda_dark = 0.5;
  double p_leak_bright_to_dark = 0.09;
  double p_leak_dark_to_bright = 0.036;
  int threshold = 3;

  /// F=1 always reads bright, F=0 always dark (up to e^-100).
  static DetectorModel ideal();
  void validate() const;
};

struct PrepModel {
  double p_prep_error = 0.0;
  void validate() const;
};

struct Detection {
  int photon_count = 0;
  bool bright = false;
};

struct FidelityReport {
  double f_bright = 0.0;  // P(bright | F=1)
  double f_dark = 0.0;    // P(dark | F=0)
  double f_mean = 0.0;
  int shots = 0;
};

/// P(N >= threshold) for N ~ Poisson(lambda).
double poisson_tail(double lambda, int threshold);

/// |0> with probability 1-p, otherwise a uniformly chosen F=1 level.
StateVector prepare(const PrepModel& prep, std::mt19937_64& rng);

/// Projects onto F=0 / F=1 using bare-basis populations, applies leaks and
/// draws a photon count. Dressed-basis states are rejected.
Detection detect(const StateVector& state, const DetectorModel& det, std::mt19937_64& rng);

/// Exact probability that detect() reports bright for this state.
double bright_probability(const StateVector& state, const DetectorModel& det);

/// Population of the F=1 manifold of a bare-basis state.
double f1_population(const StateVector& state);

FidelityReport analytic_fidelity(const DetectorModel& det);

/// Monte-Carlo estimate over n shots of each manifold. n must be >= 1000.
FidelityReport fidelity_report(const DetectorModel& det, int n, std::uint64_t seed);

}  // namespace dsq
