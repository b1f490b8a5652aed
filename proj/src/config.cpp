#include "dsq/config.hpp"

#include "dsq/errors.hpp"
#include "dsq/experiments.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dsq {
namespace {

KeyDef quantity_key(std::string key, Dimension dim, std::string def, std::string help) {
  return KeyDef{std::move(key), ValueKind::Quantity, dim, std::move(def), std::move(help), {}};
}
KeyDef number_key(std::string key, std::string def, std::string help) {
  return KeyDef{std::move(key), ValueKind::Number, Dimension::Dimensionless, std::move(def), std::move(help), {}};
}
KeyDef integer_key(std::string key, std::string def, std::string help) {
  return KeyDef{std::move(key), ValueKind::Integer, Dimension::Dimensionless, std::move(def), std::move(help), {}};
}
KeyDef choice_key(std::string key, std::vector<std::string> choices, std::string help) {
  std::string def = choices.front();
  return KeyDef{std::move(key), ValueKind::Choice, Dimension::Dimensionless, std::move(def), std::move(help),
                std::move(choices)};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<KeyDef>& global_keys() {
  static const std::vector<KeyDef> keys = {
      integer_key("seed", "1", "RNG seed"),
      integer_key("shots", "200", "shots per sweep point"),
      integer_key("workers", "1", "worker threads (does not change results)"),
      quantity_key("B", Dimension::Field, "9.8G", "static magnetic field"),
      quantity_key("omega0", Dimension::Frequency, "12.6GHz", "hyperfine splitting"),
      number_key("s1", "1397959.1836734693", "first-order Zeeman slope, Hz per G"),
      number_key("c2", "-310", "second-order Zeeman coefficient, Hz per G^2"),
      quantity_key("noise_qs_sigma", Dimension::Field, "0G", "quasi-static field noise rms"),
      quantity_key("noise_t2", Dimension::Time, "0s",
                   "calibrate noise_qs_sigma to this bare Ramsey 1/e time (0 disables)"),
      integer_key("calib_shots", "2000", "shots used by the noise calibration"),
      quantity_key("noise_ou_sigma", Dimension::Field, "0G", "Ornstein-Uhlenbeck field noise rms"),
      quantity_key("noise_ou_tau", Dimension::Time, "0s", "Ornstein-Uhlenbeck correlation time"),
      quantity_key("noise_mains_amp", Dimension::Field, "0G", "mains-synchronous field amplitude"),
      quantity_key("noise_mains_freq", Dimension::Frequency, "50Hz", "mains frequency"),
      quantity_key("noise_mains_phase", Dimension::Angle, "0rad", "mains phase at the trigger"),
      choice_key("detector", {"realistic", "ideal"}, "ideal ignores the det_* keys"),
      number_key("det_lambda_bright", "10", "mean counts for F=1"),
      number_key("det_lambda_dark", "0.5", "mean counts for F=0"),
      number_key("det_leak_bd", "0.09", "probability F=1 is pumped dark during detection"),
      number_key("det_leak_db", "0.036", "probability F=0 is pumped bright during detection"),
      integer_key("det_threshold", "3", "counts needed for a bright result"),
      number_key("prep_error", "0", "probability the ion is not prepared in |0>"),
      choice_key("prop_method", {"piecewise_exponential", "rk4"}, "propagator"),
      quantity_key("prop_dt_max", Dimension::Time, "0s", "step cap (0 = automatic)"),
      number_key("prop_norm_tol", "1e-09", "allowed norm drift"),
      KeyDef{"prop_periodic", ValueKind::Boolean, Dimension::Dimensionless, "true",
             "reuse one-period propagators for periodic rf drives", {}},
      number_key("fit_max_redchi2", "10", "reject fits with a larger reduced chi^2"),
  };
  return keys;
}

std::string canonical_value(const KeyDef& def, const std::string& raw) {
  const std::string value = trim(raw);
  auto bad = [&](const std::string& why) {
    return ValidationError("invalid value '" + value + "' for " + def.key + ": " + why);
  };
  switch (def.kind) {
    case ValueKind::Quantity: {
      const QuantityParse q = parse_quantity(value, def.dim);
      if (!q.quantity) throw bad(q.error);
      if (!std::isfinite(q.quantity->value)) throw bad("not finite");
      return format_quantity(q.quantity->value, def.dim);
    }
    case ValueKind::Number: {
      const QuantityParse q = parse_quantity(value, Dimension::Dimensionless);
      if (!q.quantity) throw bad(q.error);
      if (!std::isfinite(q.quantity->value)) throw bad("not finite");
      return format_exact(q.quantity->value);
    }
    case ValueKind::Integer: {
      long long v = 0;
      const char* b = value.data();
      const char* e = b + value.size();
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || p != e || value.empty()) throw bad("expected an integer");
      return std::to_string(v);
    }
    case ValueKind::Boolean: {
      if (value == "true" || value == "1" || value == "yes" || value == "on") return "true";
      if (value == "false" || value == "0" || value == "no" || value == "off") return "false";
      throw bad("expected true or false");
    }
    case ValueKind::Choice: {
      for (const auto& c : def.choices) {
        if (c == value) return value;
      }
      std::string list;
      for (const auto& c : def.choices) list += (list.empty() ? "" : ", ") + c;
      throw bad("expected one of " + list);
    }
    case ValueKind::Text:
      return value;
  }
  return value;
}

RunConfig RunConfig::for_experiment(const std::string& experiment) {
  RunConfig cfg;
  cfg.experiment_ = experiment;
  cfg.defs_ = global_keys();
  std::vector<std::pair<std::string, std::string>> overlay;
  if (experiment != "seq") {
    const ExperimentInfo* info = find_experiment(experiment);
    if (!info) throw ValidationError("unknown experiment '" + experiment + "'");
    cfg.defs_.insert(cfg.defs_.end(), info->params.begin(), info->params.end());
    overlay = info->overlay;
  }
  for (const auto& d : cfg.defs_) cfg.values_[d.key] = canonical_value(d, d.default_value);
  for (const auto& [k, v] : overlay) cfg.set(k, v);
  cfg.values_["experiment"] = experiment;
  return cfg;
}

const KeyDef& RunConfig::def(const std::string& key) const {
  for (const auto& d : defs_) {
    if (d.key == key) return d;
  }
  throw ValidationError("unknown configuration key '" + key + "'" +
                        (experiment_ == "seq" ? std::string() : " for experiment " + experiment_));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "experiment") {
    if (trim(value) != experiment_) {
      throw ValidationError("configuration is for experiment '" + trim(value) + "', not '" + experiment_ + "'");
    }
    return;
  }
  values_[key] = canonical_value(def(key), value);
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::load_text(const std::string& text, const std::string& name) {
  std::istringstream is(text);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(name + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError(name + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed JSON configuration: ") + e.what());
  }
  if (!j.is_object() || !j.contains("config") || !j["config"].is_object()) {
    throw ValidationError("JSON configuration needs a \"config\" object");
  }
  for (const auto& [k, v] : j["config"].items()) {
    if (!v.is_string()) throw ValidationError("JSON config value for '" + k + "' must be a string");
    set(k, v.get<std::string>());
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read configuration file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    load_json(text);
  } else {
    load_text(text, path);
  }
}

const std::string& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("configuration key '" + key + "' is not set");
  return it->second;
}

double RunConfig::quantity(const std::string& key) const {
  const KeyDef& d = def(key);
  return parse_quantity(raw(key), d.dim).quantity.value().value;
}

double RunConfig::number(const std::string& key) const {
  return parse_quantity(raw(key), Dimension::Dimensionless).quantity.value().value;
}

long long RunConfig::integer(const std::string& key) const { return std::stoll(raw(key)); }

bool RunConfig::boolean(const std::string& key) const { return raw(key) == "true"; }

const std::string& RunConfig::choice(const std::string& key) const { return raw(key); }

PhysicalConstants RunConfig::constants() const {
  PhysicalConstants k;
  k.omega0 = angular(quantity("omega0"));
  k.s1 = angular(number("s1"));
  k.c2 = angular(number("c2"));
  k.validate();
  return k;
}

NoiseModel RunConfig::noise() const {
  NoiseModel n;
  n.quasi_static_sigma = quantity("noise_qs_sigma");
  n.ou_sigma = quantity("noise_ou_sigma");
  n.ou_tau = quantity("noise_ou_tau");
  n.mains_amplitude = quantity("noise_mains_amp");
  n.mains_freq = quantity("noise_mains_freq");
  n.mains_phase = quantity("noise_mains_phase");
  n.seed = static_cast<std::uint64_t>(integer("seed"));
  n.validate();
  return n;
}

DetectorModel RunConfig::detector() const {
  if (choice("detector") == "ideal") return DetectorModel::ideal();
  DetectorModel d;
  d.lambda_bright = number("det_lambda_bright");
  d.lambda_dark = number("det_lambda_dark");
  d.p_leak_bright_to_dark = number("det_leak_bd");
  d.p_leak_dark_to_bright = number("det_leak_db");
  d.threshold = static_cast<int>(integer("det_threshold"));
  d.validate();
  return d;
}

PropagatorConfig RunConfig::propagator() const {
  PropagatorConfig p;
  p.method = choice("prop_method") == "rk4" ? Method::Rk4 : Method::PiecewiseExponential;
  p.dt_max = quantity("prop_dt_max");
  p.norm_tolerance = number("prop_norm_tol");
  p.periodic_shortcut = boolean("prop_periodic");
  p.validate();
  return p;
}

EnsembleConfig RunConfig::ensemble(double* calibrated_sigma) const {
  if (integer("seed") < 0) throw ValidationError("seed must be non-negative");
  if (integer("shots") < 1) throw ValidationError("shots must be at least 1");
  if (integer("workers") < 1) throw ValidationError("workers must be at least 1");
  const double b = quantity("B");
  if (!(b > 0.0)) throw ValidationError("B must be positive");

  EnsembleConfig e;
  e.constants = constants();
  e.calibration = SpeciesCalibration::from_field(b, e.constants);
  e.noise = noise();
  e.detector = detector();
  e.prep.p_prep_error = number("prep_error");
  e.prep.validate();
  e.propagator = propagator();
  e.seed = static_cast<std::uint64_t>(integer("seed"));
  e.shots = static_cast<int>(integer("shots"));
  e.workers = static_cast<int>(integer("workers"));

  const double t2 = quantity("noise_t2");
  if (t2 < 0.0) throw ValidationError("noise_t2 must be non-negative");
  if (t2 > 0.0) {
    if (e.noise.quasi_static_sigma != 0.0) {
      throw ValidationError("set either noise_t2 or noise_qs_sigma, not both");
    }
    CalibrationOptions opt;
    opt.shots = static_cast<int>(integer("calib_shots"));
    opt.seed = e.seed;
    e.noise.quasi_static_sigma = calibrate_quasi_static(t2, e.constants, opt).sigma_b;
  }
  if (calibrated_sigma) *calibrated_sigma = e.noise.quasi_static_sigma;
  return e;
}

}  // namespace dsq
