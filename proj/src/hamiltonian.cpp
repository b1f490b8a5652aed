#include "dsq/hamiltonian.hpp"

#include "dsq/errors.hpp"

#include <cmath>

namespace dsq {
namespace {

constexpr int k0 = index(BareLevel::Zero);
constexpr int kM = index(BareLevel::Minus);
constexpr int kZ = index(BareLevel::ZeroPrime);
constexpr int kP = index(BareLevel::Plus);

Complex phasor(double phase) { return std::polar(1.0, phase); }

// adds c|row><col| + h.c.
void add_coupling(Operator& h, int row, int col, Complex c) {
  h(row, col) += c;
  h(col, row) += std::conj(c);
}

}  // namespace

void PhysicalConstants::validate() const {
  if (!(omega0 > 0.0)) throw ValidationError("hyperfine splitting omega0 must be positive");
  if (!(c2 < 0.0)) throw ValidationError("second-order Zeeman coefficient c2 must be negative");
}

std::string_view rf_mode_name(RfMode m) {
  switch (m) {
    case RfMode::SinglePlus: return "single_plus";
    case RfMode::SingleMinus: return "single_minus";
    case RfMode::DualResonant: return "dual_resonant";
  }
  return "?";
}

bool parse_rf_mode(std::string_view text, RfMode& out) {
  if (text == "single_plus" || text == "plus") {
    out = RfMode::SinglePlus;
  } else if (text == "single_minus" || text == "minus") {
    out = RfMode::SingleMinus;
  } else if (text == "dual_resonant" || text == "dual") {
    out = RfMode::DualResonant;
  } else {
    return false;
  }
  return true;
}

double second_order_zeeman(double b, const PhysicalConstants& k) { return k.c2 * b * b; }

std::pair<double, double> zeeman_splittings(double b, const PhysicalConstants& k) {
  const double first = k.s1 * b;
  const double half_second = 0.5 * k.c2 * b * b;
  return {first + half_second, first - half_second};
}

SpeciesCalibration SpeciesCalibration::from_field(double b0, const PhysicalConstants& k) {
  if (!(b0 >= 0.0)) throw ValidationError("static field B must be non-negative");
  SpeciesCalibration cal;
  cal.b0 = b0;
  std::tie(cal.omega_b_plus, cal.omega_b_minus) = zeeman_splittings(b0, k);
  cal.delta_omega = cal.omega_b_plus - cal.omega_b_minus;
  return cal;
}

Operator h_dressing(const FieldConfig& cfg) {
  Operator h = Operator::Zero();
  if (cfg.omega_mw_plus != 0.0)
    add_coupling(h, kP, k0, 0.5 * cfg.omega_mw_plus * phasor(-cfg.phi_mw_plus));
  if (cfg.omega_mw_minus != 0.0)
    add_coupling(h, kM, k0, 0.5 * cfg.omega_mw_minus * phasor(-cfg.phi_mw_minus));
  return h;
}

Operator h_clock(const FieldConfig& cfg) {
  Operator h = Operator::Zero();
  if (cfg.omega_mw_clock != 0.0)
    add_coupling(h, kZ, k0, 0.5 * cfg.omega_mw_clock * phasor(-cfg.phi_mw_clock));
  return h;
}

double rf_main_beat(const FieldConfig& cfg) { return cfg.delta_rf; }

double rf_counter_beat(const FieldConfig& cfg, const SpeciesCalibration& cal) {
  switch (cfg.rf_mode) {
    case RfMode::SinglePlus: return cfg.delta_rf + cal.delta_omega;
    case RfMode::SingleMinus: return cal.delta_omega - cfg.delta_rf;
    case RfMode::DualResonant: return cfg.delta_rf;
  }
  return 0.0;
}

Operator h_rf(const FieldConfig& cfg, const SpeciesCalibration& cal, double t) {
  Operator h = Operator::Zero();
  if (cfg.omega_rf == 0.0) return h;
  const double half = 0.5 * cfg.omega_rf;
  // Both transitions see the same rf phase with opposite sign, as in the
  // lab-frame cos(w t + phi) drive: |+1><0'| carries e^{-i phase},
  // |-1><0'| carries e^{+i phase}.
  const double phase = cfg.phi_rf + cfg.delta_rf * t;
  switch (cfg.rf_mode) {
    case RfMode::SinglePlus:
      add_coupling(h, kP, kZ, half * phasor(-phase));
      add_coupling(h, kM, kZ, half * phasor(cfg.phi_rf + rf_counter_beat(cfg, cal) * t));
      break;
    case RfMode::SingleMinus:
      add_coupling(h, kM, kZ, half * phasor(phase));
      add_coupling(h, kP, kZ, half * phasor(-cfg.phi_rf + rf_counter_beat(cfg, cal) * t));
      break;
    case RfMode::DualResonant:
      add_coupling(h, kP, kZ, half * phasor(-phase));
      add_coupling(h, kM, kZ, half * phasor(phase));
      break;
  }
  return h;
}

Operator h_noise(double delta_b, const PhysicalConstants& k) {
  Operator h = Operator::Zero();
  const double shift = k.s1 * delta_b;
  h(kP, kP) = shift;
  h(kM, kM) = -shift;
  return h;
}

Operator h_total(const FieldConfig& cfg, const SpeciesCalibration& cal, const PhysicalConstants& k,
                 double delta_b, double t) {
  Operator h = h_dressing(cfg);
  h += h_clock(cfg);
  h += h_rf(cfg, cal, t);
  if (delta_b != 0.0) h += h_noise(delta_b, k);
  return h;
}

}  // namespace dsq
