#pragma once

#include "dsq/hamiltonian.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dsq {

/// Magnetic-field deviation delta_B(t) = quasi-static + OU + mains, in gauss.
struct NoiseModel {
  double quasi_static_sigma = 0.0;
  double ou_sigma = 0.0;
  double ou_tau = 0.0;  // seconds
  double mains_amplitude = 0.0;
  double mains_freq = 50.0;  // Hz
  double mains_phase = 0.0;  // rad, the same for every shot
  std::uint64_t seed = 0;

  void validate() const;
  bool is_zero() const { return quasi_static_sigma == 0.0 && ou_sigma == 0.0 && mains_amplitude == 0.0; }
  /// True when delta_B varies inside a shot.
  bool time_dependent() const { return ou_sigma > 0.0 || mains_amplitude > 0.0; }
  /// Largest allowed sample spacing for the active components.
  double max_spacing() const;
};

/// Sampled delta_B on a uniform grid, linearly interpolated in between.
class NoiseTrajectory {
 public:
  NoiseTrajectory() = default;
  NoiseTrajectory(double dt, std::vector<double> values) : dt_(dt), values_(std::move(values)) {}

  static NoiseTrajectory constant(double value, double duration);

  double dt() const { return dt_; }
  const std::vector<double>& values() const { return values_; }
  double duration() const { return values_.size() < 2 ? 0.0 : dt_ * static_cast<double>(values_.size() - 1); }
  bool is_constant() const { return constant_; }

  double at(double t) const;

 private:
  double dt_ = 0.0;
  std::vector<double> values_;
  bool constant_ = false;
};

/// Deterministic in (model.seed, shot_index). The sample spacing is dt,
/// tightened to model.max_spacing() when that is smaller.
NoiseTrajectory sample_trajectory(const NoiseModel& model, double duration, double dt,
                                  std::uint64_t shot_index);

/// Contrast of the bare |0>-|+1> Ramsey experiment under Gaussian
/// quasi-static field noise: exp(-(s1*sigma*t)^2 / 2).
double quasi_static_ramsey_contrast(double sigma_b, double t, const PhysicalConstants& k);

struct CalibrationOptions {
  int shots = 2000;
  std::uint64_t seed = 1;
  int max_iterations = 50;
  double rel_tol = 1e-6;
  double mw_rabi = angular(100e3);  // pi/2 pulses of the Ramsey probe
};

struct CalibrationResult {
  double sigma_b = 0.0;     // gauss
  double analytic_seed = 0.0;
  double contrast_at_t2 = 0.0;
  int iterations = 0;
};

/// Quasi-static sigma_B that puts the simulated bare |0>-|+1> Ramsey 1/e
/// time at target_t2. Starts from sqrt2/(s1*T2) and bisects on the
/// simulated contrast with common random numbers.
CalibrationResult calibrate_quasi_static(double target_t2, const PhysicalConstants& k,
                                         const CalibrationOptions& opt = {});

void write_trajectory_csv(std::ostream& os, const NoiseTrajectory& traj);

}  // namespace dsq
