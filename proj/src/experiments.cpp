#include "dsq/experiments.hpp"

#include "dsq/errors.hpp"
#include "dsq/fit.hpp"

#include <algorithm>
#include <cmath>

namespace dsq {
namespace {

KeyDef q(std::string key, Dimension dim, std::string def, std::string help) {
  return KeyDef{std::move(key), ValueKind::Quantity, dim, std::move(def), std::move(help), {}};
}
KeyDef n(std::string key, std::string def, std::string help) {
  return KeyDef{std::move(key), ValueKind::Integer, Dimension::Dimensionless, std::move(def), std::move(help), {}};
}
KeyDef choice(std::string key, std::vector<std::string> choices, std::string help) {
  std::string def = choices.front();
  return KeyDef{std::move(key), ValueKind::Choice, Dimension::Dimensionless, std::move(def), std::move(help),
                std::move(choices)};
}

std::vector<KeyDef> dressed_keys() {
  return {
      q("prep_rabi", Dimension::Frequency, "100kHz", "Rabi frequency of the preparation and swap pi pulses"),
      q("tw", Dimension::Time, "450us", "STIRAP pulse FWHM"),
      q("toff", Dimension::Time, "356us", "STIRAP peak separation"),
      q("peak", Dimension::Frequency, "25kHz", "STIRAP peak Rabi frequency"),
  };
}

std::vector<KeyDef> with_dressed(std::vector<KeyDef> own) {
  auto d = dressed_keys();
  own.insert(own.end(), d.begin(), d.end());
  return own;
}

std::vector<double> linspace(double a, double b, long long count) {
  if (count < 1) throw ValidationError("points must be at least 1");
  std::vector<double> xs;
  if (count == 1) return {a};
  for (long long i = 0; i < count; ++i) xs.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return xs;
}

std::vector<double> phase_grid(long long count) {
  if (count < 1) throw ValidationError("points must be at least 1");
  std::vector<double> xs;
  for (long long i = 0; i < count; ++i) xs.push_back(kTwoPi * static_cast<double>(i) / static_cast<double>(count));
  return xs;
}

double positive(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.quantity(key);
  if (!(v > 0.0)) throw ValidationError(key + " must be positive");
  return v;
}

double non_negative(const RunConfig& cfg, const std::string& key) {
  const double v = cfg.quantity(key);
  if (v < 0.0) throw ValidationError(key + " must be non-negative");
  return v;
}

DressedSequence dressed_from(const RunConfig& cfg) {
  DressedSequence d;
  d.prep_rabi_hz = positive(cfg, "prep_rabi");
  d.t_w = positive(cfg, "tw");
  d.t_off = positive(cfg, "toff");
  d.peak_hz = positive(cfg, "peak");
  return d;
}

const PopulationRecord* record(const ResultRow& row, const std::string& label) {
  const PopulationRecord* found = nullptr;
  for (const auto& r : row.records) {
    if (r.label == label) found = &r;
  }
  return found;
}

// Populations at the end of the dressed hold (or right after STIRAP when the
// hold is empty).
const PopulationRecord& hold_record(const ResultRow& row) {
  if (const auto* r = record(row, "hold")) return *r;
  if (const auto* r = record(row, "stirap_enter")) return *r;
  throw Error("dressed sequence has no STIRAP record");
}

struct Context {
  const RunConfig& cfg;
  EnsembleConfig ens;
  ExperimentResult result;
  double max_redchi2;

  explicit Context(const RunConfig& c) : cfg(c) {
    double sigma = 0.0;
    ens = cfg.ensemble(&sigma);
    result.name = cfg.experiment();
    result.config = cfg.values();
    max_redchi2 = cfg.number("fit_max_redchi2");
    if (cfg.quantity("noise_t2") > 0.0) {
      result.notes.push_back("calibrated quasi-static sigma " + format_quantity(sigma, Dimension::Field));
    }
  }

  void run(const std::vector<SweepPoint>& points) { result.rows = run_ensemble(points, ens); }

  void add_fit(FitReport rep) {
    check_fit(rep, max_redchi2);
    result.fits.push_back(std::move(rep));
  }
};

FitParameter scaled(const FitParameter& p, std::string name, double factor, std::string unit) {
  return FitParameter{std::move(name), p.value * factor, std::abs(p.uncertainty * factor), std::move(unit)};
}

ExperimentResult rabi_bare(const RunConfig& cfg) {
  Context ctx(cfg);
  const std::string tr = cfg.choice("transition");
  const Transition t = tr == "plus" ? Transition::Plus : tr == "minus" ? Transition::Minus : Transition::Clock;
  const double rabi = positive(cfg, "omega");
  std::vector<SweepPoint> pts;
  for (double x : linspace(0.0, non_negative(cfg, "t_max"), cfg.integer("points"))) {
    Schedule s;
    s.append(mw_pulse(t, angular(rabi), x));
    s.add_label("measure");
    pts.push_back({x, std::move(s)});
  }
  ctx.result.x_name = "duration";
  ctx.result.x_unit = "s";
  ctx.run(pts);
  if (pts.size() >= 5 && pts.back().x > 0.0) {
    FitReport rep = fit_rabi(fit_data_from_rows(ctx.result.rows));
    rep.parameters.push_back(scaled(rep.get("omega"), "rabi_hz", 1.0 / kTwoPi, "Hz"));
    ctx.add_fit(std::move(rep));
  } else {
    ctx.result.notes.push_back("too few points for a fit");
  }
  return ctx.result;
}

ExperimentResult ramsey_bare(const RunConfig& cfg) {
  Context ctx(cfg);
  const bool clock = cfg.choice("qubit") == "clock";
  const Transition t = clock ? Transition::Clock : Transition::Plus;
  const double omega = angular(positive(cfg, "omega"));
  std::vector<SweepPoint> pts;
  for (double x : linspace(0.0, non_negative(cfg, "delay_max"), cfg.integer("points"))) {
    Schedule s;
    s.append(mw_half_pi_pulse(t, omega));
    s.append(wait(x));
    s.append(mw_half_pi_pulse(t, omega));
    s.add_label("measure");
    pts.push_back({x, std::move(s)});
  }
  ctx.result.x_name = "delay";
  ctx.result.x_unit = "s";
  ctx.result.derived_name = "contrast";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) r.derived = 2.0 * r.p_model - 1.0;
  if (clock) {
    ctx.result.notes.push_back("clock qubit is first-order field insensitive; no decay fit");
  } else if (pts.size() >= 5 && pts.back().x > 0.0) {
    FitReport rep = fit_gaussian_decay(fit_data_from_rows(ctx.result.rows));
    const FitParameter& k = rep.get("kappa");
    if (k.value > 0.0) {
      rep.parameters.push_back(
          FitParameter{"t2", 1.0 / std::sqrt(k.value), 0.5 * k.uncertainty * std::pow(k.value, -1.5), "s"});
    }
    ctx.add_fit(std::move(rep));
  }
  return ctx.result;
}

ExperimentResult stirap_efficiency(const RunConfig& cfg) {
  Context ctx(cfg);
  const double peak = positive(cfg, "peak");
  const double ratio = cfg.number("toff_ratio");
  if (!(ratio > 0.0)) throw ValidationError("toff_ratio must be positive");
  const double prep = angular(positive(cfg, "prep_rabi"));
  std::vector<SweepPoint> pts;
  for (double tw : linspace(positive(cfg, "tw_min"), positive(cfg, "tw_max"), cfg.integer("points"))) {
    Schedule s;
    s.append(mw_pi_pulse(Transition::Plus, prep));
    s.append(stirap_half(tw, ratio * tw, angular(peak), StirapDirection::Enter));
    s.append(stirap_half(tw, ratio * tw, angular(peak), StirapDirection::Exit));
    s.append(mw_pi_pulse(Transition::Minus, prep));
    s.add_label("measure");
    pts.push_back({tw, std::move(s)});
  }
  ctx.result.x_name = "t_w";
  ctx.result.x_unit = "s";
  ctx.result.derived_name = "transfer_efficiency";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) {
    const auto* rec = record(r, "stirap_exit");
    r.derived = rec ? rec->bare[index(BareLevel::Minus)] : 0.0;
  }
  ctx.result.notes.push_back(
      "transfer efficiency is |+1> to |-1> through enter and exit; the measured 85% includes laboratory "
      "imperfections that are not modelled");
  return ctx.result;
}

ExperimentResult dressed_lifetime(const RunConfig& cfg) {
  Context ctx(cfg);
  const DressedSequence d = dressed_from(cfg);
  const double mw = angular(d.hold_mw_hz());
  std::vector<SweepPoint> pts;
  for (double x : linspace(0.0, non_negative(cfg, "t_max"), cfg.integer("points"))) {
    pts.push_back({x, d.build(hold(x, mw))});
  }
  ctx.result.x_name = "t_DS";
  ctx.result.x_unit = "s";
  ctx.result.derived_name = "dark_population";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) r.derived = hold_record(r).dressed[index(DressedLevel::Dark)];
  if (ctx.ens.noise.is_zero()) {
    ctx.result.notes.push_back("no field noise; no decay fit");
  } else if (pts.size() >= 5 && pts.back().x > 0.0) {
    FitReport rep = fit_exponential(fit_data_from_rows(ctx.result.rows));
    const FitParameter& rate = rep.get("rate");
    if (rate.value > 0.0) {
      rep.parameters.push_back(
          FitParameter{"lifetime", 1.0 / rate.value, rate.uncertainty / (rate.value * rate.value), "s"});
    }
    ctx.add_fit(std::move(rep));
  }
  return ctx.result;
}

ExperimentResult dressed_rabi(const RunConfig& cfg) {
  Context ctx(cfg);
  const DressedSequence d = dressed_from(cfg);
  const double mw = angular(d.hold_mw_hz());
  const double rf = angular(positive(cfg, "omega_rf"));
  const double phase = cfg.quantity("phi_rf");
  const double t_min = non_negative(cfg, "t_min");
  const double t_max = non_negative(cfg, "t_max");
  if (t_max < t_min) throw ValidationError("t_max must not be below t_min");
  std::vector<SweepPoint> pts;
  for (double x : linspace(t_min, t_max, cfg.integer("points"))) {
    Segment h = hold(x, mw);
    if (x > 0.0) h = with_rf(h, rf, phase, 0.0, 0.0, x, RfMode::SinglePlus);
    pts.push_back({x, d.build(h)});
  }
  ctx.result.x_name = "rf_duration";
  ctx.result.x_unit = "s";
  ctx.result.derived_name = "p_0prime";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) r.derived = hold_record(r).dressed[index(DressedLevel::ZeroPrime)];
  if (pts.size() >= 6 && t_max > t_min) {
    FitData data = fit_data_from_rows(ctx.result.rows);
    for (auto& x : data.x) x -= t_min;
    FitReport rep = fit_damped_sinusoid(data);
    rep.parameters.push_back(scaled(rep.get("omega"), "rabi_hz", 1.0 / kTwoPi, "Hz"));
    rep.parameters.push_back(scaled(rep.get("A"), "contrast", 2.0, ""));
    ctx.add_fit(std::move(rep));
  }
  return ctx.result;
}

ExperimentResult dressed_ramsey(const RunConfig& cfg) {
  Context ctx(cfg);
  const DressedSequence d = dressed_from(cfg);
  const double mw = angular(d.hold_mw_hz());
  const double rf = angular(positive(cfg, "omega_rf"));
  const double phase = cfg.quantity("phi_rf");
  const double detune = angular(cfg.quantity("delta_rf"));
  const double half = 0.5 * kPi / effective_rf_rabi(rf, RfMode::SinglePlus);
  std::vector<SweepPoint> pts;
  for (double gap : linspace(0.0, non_negative(cfg, "gap_max"), cfg.integer("points"))) {
    Segment h = hold(2.0 * half + gap, mw);
    h = with_rf(h, rf, phase, detune, 0.0, half, RfMode::SinglePlus);
    h = with_rf(h, rf, phase, detune, half + gap, half, RfMode::SinglePlus);
    pts.push_back({gap, d.build(h)});
  }
  ctx.result.x_name = "gap";
  ctx.result.x_unit = "s";
  ctx.result.derived_name = "p_0prime";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) r.derived = hold_record(r).dressed[index(DressedLevel::ZeroPrime)];
  if (pts.size() >= 6 && pts.back().x > 0.0) {
    FitReport rep = fit_damped_sinusoid(fit_data_from_rows(ctx.result.rows));
    rep.parameters.push_back(scaled(rep.get("omega"), "fringe_hz", 1.0 / kTwoPi, "Hz"));
    ctx.add_fit(std::move(rep));
  }
  return ctx.result;
}

ExperimentResult phase_axis(const RunConfig& cfg) {
  Context ctx(cfg);
  const DressedSequence d = dressed_from(cfg);
  const double mw = angular(d.hold_mw_hz());
  const double rf = angular(positive(cfg, "omega_rf"));
  const double half = 0.5 * kPi / effective_rf_rabi(rf, RfMode::SinglePlus);
  std::vector<SweepPoint> pts;
  for (double phi : phase_grid(cfg.integer("points"))) {
    Segment h = hold(2.0 * half, mw);
    h = with_rf(h, rf, 0.0, 0.0, 0.0, half, RfMode::SinglePlus);
    h = with_rf(h, rf, phi, 0.0, half, half, RfMode::SinglePlus);
    pts.push_back({phi, d.build(h)});
  }
  ctx.result.x_name = "phi_rf";
  ctx.result.x_unit = "rad";
  ctx.result.derived_name = "p_dark";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) r.derived = hold_record(r).dressed[index(DressedLevel::Dark)];
  return ctx.result;
}

ExperimentResult timoney_mode(const RunConfig& cfg) {
  Context ctx(cfg);
  ctx.ens.calibration.delta_omega = 0.0;
  ctx.ens.calibration.omega_b_minus = ctx.ens.calibration.omega_b_plus;
  const DressedSequence d = dressed_from(cfg);
  const double mw = angular(d.hold_mw_hz());
  const double rf = angular(positive(cfg, "omega_rf"));
  // |<D|H|0'>| peaks at Omega_rf/sqrt2; stop at a quarter of that rotation so
  // the transferred population stays on the invertible branch of sin^2.
  const double g_max = rf / std::sqrt(2.0);
  const double tau = 0.25 * kPi / g_max;
  std::vector<SweepPoint> pts;
  for (double phi : phase_grid(cfg.integer("points"))) {
    Segment h = hold(tau, mw);
    h = with_rf(h, rf, phi, 0.0, 0.0, tau, RfMode::DualResonant);
    pts.push_back({phi, d.build(h)});
  }
  ctx.result.x_name = "phi_rf";
  ctx.result.x_unit = "rad";
  ctx.result.derived_name = "coupling_rate_rad_per_s";
  ctx.run(pts);
  for (auto& r : ctx.result.rows) {
    const double p = std::clamp(hold_record(r).dressed[index(DressedLevel::ZeroPrime)], 0.0, 1.0);
    r.derived = std::asin(std::sqrt(p)) / tau;
  }
  ctx.result.notes.push_back("rf drive duration " + format_quantity(tau, Dimension::Time) +
                             "; delta_omega forced to 0");
  return ctx.result;
}

}  // namespace

double DressedSequence::hold_mw_hz() const { return stirap_crossing_amplitude(t_w, t_off, peak_hz); }

Schedule DressedSequence::build(const Segment& hold_body) const {
  Schedule s;
  s.append(mw_pi_pulse(Transition::Plus, angular(prep_rabi_hz)));
  s.append(stirap_half(t_w, t_off, angular(peak_hz), StirapDirection::Enter));
  s.append(hold_body);
  s.append(stirap_half(t_w, t_off, angular(peak_hz), StirapDirection::Exit));
  s.append(mw_pi_pulse(Transition::Minus, angular(prep_rabi_hz)));
  s.add_label("measure");
  return s;
}

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> reg = {
      {"rabi_bare",
       "bare microwave Rabi flopping vs pulse duration",
       {choice("transition", {"clock", "plus", "minus"}, "driven transition"),
        q("omega", Dimension::Frequency, "342kHz", "microwave Rabi frequency"),
        q("t_max", Dimension::Time, "10us", "longest pulse"), n("points", "41", "sweep points")},
       {{"detector", "ideal"}}},
      {"ramsey_bare",
       "bare-state Ramsey contrast vs delay",
       {choice("qubit", {"plus", "clock"}, "|0>-|+1> or clock qubit"),
        q("omega", Dimension::Frequency, "100kHz", "Rabi frequency of the pi/2 pulses"),
        q("delay_max", Dimension::Time, "80ms", "longest delay"), n("points", "33", "sweep points")},
       {{"detector", "ideal"}, {"noise_t2", "40ms"}, {"shots", "2000"}}},
      {"stirap_efficiency",
       "STIRAP enter+exit transfer vs pulse width",
       {q("tw_min", Dimension::Time, "50us", "narrowest FWHM"), q("tw_max", Dimension::Time, "600us", "widest FWHM"),
        n("points", "12", "sweep points"), q("peak", Dimension::Frequency, "25kHz", "peak Rabi frequency"),
        KeyDef{"toff_ratio", ValueKind::Number, Dimension::Dimensionless, "0.7911111111111111",
               "peak separation as a fraction of t_w", {}},
        q("prep_rabi", Dimension::Frequency, "100kHz", "Rabi frequency of the pi pulses")},
       {{"detector", "ideal"}}},
      {"dressed_lifetime",
       "dark-state survival vs hold time under field noise",
       with_dressed({q("t_max", Dimension::Time, "10ms", "longest hold"), n("points", "11", "sweep points")}),
       {{"detector", "ideal"}, {"noise_ou_sigma", "1.3mG"}, {"noise_ou_tau", "100us"}}},
      {"dressed_rabi",
       "rf Rabi flopping between |D> and |0'>",
       with_dressed({q("omega_rf", Dimension::Frequency, "2.687kHz", "rf Rabi frequency"),
                     q("phi_rf", Dimension::Angle, "0rad", "rf phase"),
                     q("t_min", Dimension::Time, "0s", "shortest rf pulse"),
                     q("t_max", Dimension::Time, "2ms", "longest rf pulse"), n("points", "41", "sweep points")}),
       {{"detector", "ideal"}}},
      {"dressed_ramsey",
       "Ramsey fringe of two detuned rf pi/2 pulses vs gap",
       with_dressed({q("omega_rf", Dimension::Frequency, "2.687kHz", "rf Rabi frequency"),
                     q("phi_rf", Dimension::Angle, "0rad", "rf phase"),
                     q("delta_rf", Dimension::Frequency, "160Hz", "rf detuning"),
                     q("gap_max", Dimension::Time, "20ms", "longest gap"), n("points", "41", "sweep points")}),
       {{"detector", "ideal"}}},
      {"phase_axis",
       "two rf pi/2 pulses with relative phase phi",
       with_dressed({q("omega_rf", Dimension::Frequency, "250Hz", "rf Rabi frequency"),
                     n("points", "32", "phases on [0, 2pi)")}),
       {{"detector", "ideal"}, {"tw", "900us"}, {"toff", "712us"}}},
      {"timoney_mode",
       "|D>-|0'> coupling rate of the two-field rf drive vs phase",
       with_dressed({q("omega_rf", Dimension::Frequency, "500Hz", "rf Rabi frequency of each field"),
                     n("points", "16", "phases on [0, 2pi)")}),
       {{"detector", "ideal"}}},
  };
  return reg;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  const std::string& name = cfg.experiment();
  if (name == "rabi_bare") return rabi_bare(cfg);
  if (name == "ramsey_bare") return ramsey_bare(cfg);
  if (name == "stirap_efficiency") return stirap_efficiency(cfg);
  if (name == "dressed_lifetime") return dressed_lifetime(cfg);
  if (name == "dressed_rabi") return dressed_rabi(cfg);
  if (name == "dressed_ramsey") return dressed_ramsey(cfg);
  if (name == "phase_axis") return phase_axis(cfg);
  if (name == "timoney_mode") return timoney_mode(cfg);
  throw ValidationError("unknown experiment '" + name + "'");
}

ExperimentResult run_sequence(const Schedule& schedule, const RunConfig& cfg) {
  Context ctx(cfg);
  if (schedule.settings().b_field) {
    ctx.ens.calibration = SpeciesCalibration::from_field(*schedule.settings().b_field, ctx.ens.constants);
    ctx.result.notes.push_back("field B taken from the sequence");
  }
  ctx.result.x_name = "point";
  ctx.result.x_unit = "";
  ctx.run({SweepPoint{0.0, schedule}});
  return ctx.result;
}

}  // namespace dsq
