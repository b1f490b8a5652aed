#pragma once

#include "dsq/hamiltonian.hpp"
#include "dsq/measure.hpp"
#include "dsq/noise.hpp"
#include "dsq/pulses.hpp"
#include "dsq/result.hpp"

#include <cstdint>
#include <vector>

namespace dsq {

enum class Method { PiecewiseExponential, Rk4 };

struct PropagatorConfig {
  Method method = Method::PiecewiseExponential;
  // 0 selects the frequency rule 1/(20 f_max) per sub-interval; a positive
  // value can only tighten it.
  double dt_max = 0.0;
  double norm_tolerance = 1e-9;
  // Reuse one-period propagators inside intervals whose Hamiltonian is
  // periodic (single-field rf with its counter-transition beat).
  bool periodic_shortcut = true;

  void validate() const;
};

struct ShotResult {
  StateVector final_state;
  std::vector<PopulationRecord> records;
  std::uint64_t shot_index = 0;
};

/// Exact propagator exp(-i H dt) of a Hermitian H.
Operator unitary_step(const Operator& h, double dt);

/// Time-ordered propagation through the schedule. The state is never
/// renormalized; drift beyond cfg.norm_tolerance raises IntegrationError
/// naming the segment.
ShotResult evolve(const StateVector& initial, const Schedule& schedule, const NoiseTrajectory& noise,
                  const SpeciesCalibration& cal, const PhysicalConstants& k, const PropagatorConfig& cfg,
                  std::uint64_t shot_index = 0);

std::array<double, 4> dressed_populations(const ShotResult& result);

struct SweepPoint {
  double x = 0.0;
  Schedule schedule;
};

struct EnsembleConfig {
  NoiseModel noise;
  DetectorModel detector;
  PrepModel prep;
  PropagatorConfig propagator;
  SpeciesCalibration calibration = SpeciesCalibration::from_field(9.80, PhysicalConstants{});
  PhysicalConstants constants;
  std::uint64_t seed = 1;
  int shots = 200;
  int workers = 1;
};

/// Samples noise, prepares, evolves and detects every shot of every point.
/// Randomness is keyed by (seed, point * shots + shot), and per-shot
/// results are reduced in shot order, so the output does not depend on
/// the worker count.
std::vector<ResultRow> run_ensemble(const std::vector<SweepPoint>& points, const EnsembleConfig& cfg);

}  // namespace dsq
