#pragma once

#include "dsq/result.hpp"

#include <iosfwd>
#include <string>

namespace dsq {

/// Columns x, x_unit, p_bright, ci_low, ci_high, n_shots.
void write_csv(std::ostream& os, const ExperimentResult& result);
std::string to_csv(const ExperimentResult& result);

/// Sidecar with fits, per-row model values, notes and the resolved config.
std::string to_json(const ExperimentResult& result);

}  // namespace dsq
