#pragma once

#include "dsq/statespace.hpp"
#include "dsq/units.hpp"

#include <string_view>
#include <utility>

namespace dsq {

/// All frequencies are angular (rad/s); fields are in gauss.
struct PhysicalConstants {
  double omega0 = angular(12.6e9);              // hyperfine splitting
  double s1 = angular(13.7e6) / 9.80;           // first-order Zeeman slope, rad/s per G
  double c2 = -angular(0.31e3);                 // second-order coefficient, rad/s per G^2

  void validate() const;
};

/// Which rf transition the single rf field is tuned to, or the two-field
/// resonant drive of the looped scheme.
enum class RfMode { SinglePlus, SingleMinus, DualResonant };

std::string_view rf_mode_name(RfMode m);
bool parse_rf_mode(std::string_view text, RfMode& out);

/// Instantaneous control parameters of every applied field.
struct FieldConfig {
  double omega_mw_plus = 0.0;   // |0> <-> |+1>
  double omega_mw_minus = 0.0;  // |0> <-> |-1>
  double phi_mw_plus = 0.0;
  double phi_mw_minus = 0.0;
  double omega_mw_clock = 0.0;  // |0> <-> |0'>
  double phi_mw_clock = 0.0;
  double omega_rf = 0.0;
  double phi_rf = 0.0;    // referenced to absolute time t = 0
  double delta_rf = 0.0;  // detuning from the targeted rf resonance
  RfMode rf_mode = RfMode::SinglePlus;
};

struct SpeciesCalibration {
  double b0 = 9.80;  // gauss
  double omega_b_plus = 0.0;
  double omega_b_minus = 0.0;
  double delta_omega = 0.0;  // omega_b_plus - omega_b_minus

  static SpeciesCalibration from_field(double b0, const PhysicalConstants& k);
};

/// delta_omega = c2 * B^2.
double second_order_zeeman(double b, const PhysicalConstants& k);

/// omega_B^+- = s1*B +- c2*B^2/2.
std::pair<double, double> zeeman_splittings(double b, const PhysicalConstants& k);

/// Two resonant microwaves on |0><->|+-1>.
Operator h_dressing(const FieldConfig& cfg);

/// Resonant microwave on the clock transition |0> <-> |0'>.
Operator h_clock(const FieldConfig& cfg);

/// rf coupling of |0'> to |+1> and |-1>, in the frame co-rotating with the
/// rf. In single-field modes the off-resonant counter-transition carries
/// its explicit beat at delta_omega; dual_resonant is beat-free.
Operator h_rf(const FieldConfig& cfg, const SpeciesCalibration& cal, double t);

/// First-order Zeeman shift of |+-1> for a field deviation delta_b (gauss).
Operator h_noise(double delta_b, const PhysicalConstants& k);

Operator h_total(const FieldConfig& cfg, const SpeciesCalibration& cal, const PhysicalConstants& k,
                 double delta_b, double t);

/// Angular frequency at which the counter-transition term beats in the
/// given mode (0 for dual_resonant).
double rf_counter_beat(const FieldConfig& cfg, const SpeciesCalibration& cal);

/// Angular frequency of the time dependence of the resonant rf term.
double rf_main_beat(const FieldConfig& cfg);

}  // namespace dsq
