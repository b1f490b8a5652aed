#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace dsq {

/// Simulation-side population snapshot at the end of a schedule segment.
struct PopulationRecord {
  std::string label;
  double time = 0.0;
  std::array<double, 4> bare{};     // (|0>, |-1>, |0'>, |+1>)
  std::array<double, 4> dressed{};  // (|0'>, |D>, |u>, |d>)
};

struct ResultRow {
  double x = 0.0;
  int n_shots = 0;
  int bright = 0;
  double p_bright = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  // Shot-averaged exact bright probability (no counting noise).
  double p_model = 0.0;
  std::array<double, 4> final_bare{};
  std::vector<PopulationRecord> records;
  // Experiment-specific quantity derived from the row, e.g. a rate.
  double derived = 0.0;
};

struct FitParameter {
  std::string name;
  double value = 0.0;
  double uncertainty = 0.0;
  std::string unit;
};

struct FitReport {
  std::string model;
  std::vector<FitParameter> parameters;
  double reduced_chi2 = 0.0;
  bool converged = false;

  const FitParameter& get(const std::string& name) const;
};

struct ExperimentResult {
  std::string name;
  std::string x_name;
  std::string x_unit;
  std::string derived_name;
  std::vector<ResultRow> rows;
  std::vector<FitReport> fits;
  std::vector<std::string> notes;
  std::map<std::string, std::string> config;
};

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

/// 95% Wilson score interval for k successes in n trials.
WilsonInterval wilson_interval(int k, int n, double z = 1.959963984540054);

}  // namespace dsq
