#pragma once

#include "dsq/propagator.hpp"
#include "dsq/units.hpp"

#include <map>
#include <string>
#include <vector>

namespace dsq {

enum class ValueKind { Quantity, Number, Integer, Boolean, Choice, Text };

struct KeyDef {
  std::string key;
  ValueKind kind = ValueKind::Number;
  Dimension dim = Dimension::Dimensionless;
  std::string default_value;
  std::string help;
  std::vector<std::string> choices;
};

/// Settings shared by every run.
const std::vector<KeyDef>& global_keys();

/// Flat key/value run configuration. Values are stored in canonical text so
/// the resolved table can be written out and read back exactly.
class RunConfig {
 public:
  /// Global keys plus the keys of the named experiment, with its default
  /// overlay applied. "seq" selects the raw-sequence runner (globals only).
  static RunConfig for_experiment(const std::string& experiment);

  const std::string& experiment() const { return experiment_; }

  /// Validates against the key's type and stores the canonical form.
  void set(const std::string& key, const std::string& value);
  /// "key=value" as given on the command line.
  void set_assignment(const std::string& assignment);

  /// `key = value` lines with '#' comments.
  void load_text(const std::string& text, const std::string& name = "<config>");
  /// JSON sidecar written by a previous run; its "config" object is loaded.
  void load_json(const std::string& text);
  /// Picks JSON or text by the first non-blank character.
  void load_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& raw(const std::string& key) const;
  double quantity(const std::string& key) const;
  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& choice(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::vector<KeyDef>& keys() const { return defs_; }

  PhysicalConstants constants() const;
  NoiseModel noise() const;  // quasi-static sigma as given, before calibration
  DetectorModel detector() const;
  PropagatorConfig propagator() const;
  /// Everything the ensemble runner needs. Calibrates the quasi-static
  /// sigma first when noise_t2 is set.
  EnsembleConfig ensemble(double* calibrated_sigma = nullptr) const;

 private:
  const KeyDef& def(const std::string& key) const;

  std::string experiment_;
  std::vector<KeyDef> defs_;
  std::map<std::string, std::string> values_;
};

/// Parses a key's value the way RunConfig::set does; returns canonical text.
std::string canonical_value(const KeyDef& def, const std::string& value);

}  // namespace dsq
