#pragma once

#include "dsq/config.hpp"
#include "dsq/result.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dsq {

struct ExperimentInfo {
  std::string name;
  std::string description;
  std::vector<KeyDef> params;
  // global keys whose default differs for this experiment
  std::vector<std::pair<std::string, std::string>> overlay;
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

/// Runs the sweep and fits. Throws FitError when a fit is rejected.
ExperimentResult run_experiment(const RunConfig& cfg);

/// Single-point run of a parsed sequence.
ExperimentResult run_sequence(const Schedule& schedule, const RunConfig& cfg);

/// Dressed-state frame used by the dressed experiments: prepare |+1>,
/// STIRAP into |D>, hold (with rf), STIRAP out, swap |-1> to |0>.
struct DressedSequence {
  double prep_rabi_hz = 100e3;
  double t_w = 450e-6;
  double t_off = 356e-6;
  double peak_hz = 25e3;

  double hold_mw_hz() const;
  /// hold_body must be a Hold segment built with hold_mw_hz().
  Schedule build(const Segment& hold_body) const;
};

}  // namespace dsq
