#include "dsq/output.hpp"

#include "dsq/errors.hpp"
#include "dsq/units.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <sstream>

namespace dsq {

const FitParameter& FitReport::get(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw Error("fit " + model + " has no parameter '" + name + "'");
}

WilsonInterval wilson_interval(int k, int n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = n;
  const double p = k / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

void write_csv(std::ostream& os, const ExperimentResult& result) {
  os << "x,x_unit,p_bright,ci_low,ci_high,n_shots\n";
  for (const auto& r : result.rows) {
    os << format_exact(r.x) << ',' << result.x_unit << ',' << format_exact(r.p_bright) << ','
       << format_exact(r.ci_low) << ',' << format_exact(r.ci_high) << ',' << r.n_shots << '\n';
  }
}

std::string to_csv(const ExperimentResult& result) {
  std::ostringstream os;
  write_csv(os, result);
  return os.str();
}

std::string to_json(const ExperimentResult& result) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = result.name;
  j["x_name"] = result.x_name;
  j["x_unit"] = result.x_unit;
  j["derived_name"] = result.derived_name;
  ordered_json fits = ordered_json::array();
  for (const auto& f : result.fits) {
    ordered_json jf;
    jf["model"] = f.model;
    jf["converged"] = f.converged;
    jf["reduced_chi2"] = f.reduced_chi2;
    ordered_json params = ordered_json::array();
    for (const auto& p : f.parameters) {
      params.push_back({{"name", p.name}, {"value", p.value}, {"uncertainty", p.uncertainty}, {"unit", p.unit}});
    }
    jf["parameters"] = params;
    fits.push_back(jf);
  }
  j["fits"] = fits;
  ordered_json rows = ordered_json::array();
  for (const auto& r : result.rows) {
    ordered_json jr;
    jr["x"] = r.x;
    jr["n_shots"] = r.n_shots;
    jr["bright"] = r.bright;
    jr["p_bright"] = r.p_bright;
    jr["ci_low"] = r.ci_low;
    jr["ci_high"] = r.ci_high;
    jr["p_model"] = r.p_model;
    jr["derived"] = r.derived;
    jr["final_bare"] = r.final_bare;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  j["notes"] = result.notes;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : result.config) cfg[k] = v;
  j["config"] = cfg;
  return j.dump(2) + "\n";
}

}  // namespace dsq
