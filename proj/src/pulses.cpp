#include "dsq/pulses.hpp"

#include "dsq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dsq {
namespace {

// Envelopes are cut where they fall below this fraction of their peak.
constexpr double kTruncationLevel = 1e-4;

bool nearly_equal(double a, double b, double rel_tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= rel_tol * scale;
}

void add_rf_window(Segment& seg, const RfWindow& w) {
  if (w.duration < 0.0) throw ValidationError("rf window has negative duration");
  if (w.duration == 0.0) return;
  if (w.rabi_hz < 0.0) throw ValidationError("rf Rabi frequency must be non-negative");
  const double slack = 1e-12 * std::max(seg.duration, w.end());
  if (w.start < 0.0 || w.end() > seg.duration + slack) {
    throw ValidationError("rf window [" + format_exact(w.start) + ", " + format_exact(w.end()) +
                          "] s lies outside the " + format_exact(seg.duration) + " s segment");
  }
  for (const auto& other : seg.rf) {
    if (w.start < other.end() - slack && other.start < w.end() - slack) {
      throw ValidationError("rf windows overlap");
    }
  }
  RfWindow clipped = w;
  if (clipped.end() > seg.duration) clipped.duration = seg.duration - clipped.start;
  seg.rf.push_back(clipped);
  std::sort(seg.rf.begin(), seg.rf.end(),
            [](const RfWindow& a, const RfWindow& b) { return a.start < b.start; });
}

}  // namespace

std::string_view transition_name(Transition t) {
  switch (t) {
    case Transition::Plus: return "plus";
    case Transition::Minus: return "minus";
    case Transition::Clock: return "clock";
  }
  return "?";
}

double fwhm_to_sigma(double t_w) { return t_w / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

double stirap_truncation_radius(double t_w) {
  return fwhm_to_sigma(t_w) * std::sqrt(-2.0 * std::log(kTruncationLevel));
}

double stirap_crossing_amplitude(double t_w, double t_off, double peak) {
  const double s = fwhm_to_sigma(t_w);
  const double half = 0.5 * t_off;
  return peak * std::exp(-half * half / (2.0 * s * s));
}

double Envelope::sigma() const { return fwhm_to_sigma(t_w); }

double Envelope::value(double t) const {
  if (kind == Kind::Constant) return peak;
  const double s = sigma();
  const double x = t - center;
  return peak * std::exp(-x * x / (2.0 * s * s));
}

double effective_rf_rabi(double omega_rf, RfMode mode) {
  // single field: <D|H|0'> = Omega_rf/(2 sqrt2); looped drive at phi=pi/2:
  // <D|H|0'> = Omega_rf/sqrt2
  return mode == RfMode::DualResonant ? std::sqrt(2.0) * omega_rf : omega_rf / std::sqrt(2.0);
}

const RfWindow* Segment::active_window(double t_local) const {
  for (const auto& w : rf) {
    if (t_local >= w.start && t_local < w.end()) return &w;
  }
  return nullptr;
}

FieldConfig Segment::controls(double t_local) const {
  FieldConfig cfg;
  cfg.omega_mw_plus = plus.value(t_local);
  cfg.omega_mw_minus = minus.value(t_local);
  cfg.omega_mw_clock = clock.value(t_local);
  cfg.phi_mw_plus = phi_plus;
  cfg.phi_mw_minus = phi_minus;
  cfg.phi_mw_clock = phi_clock;
  if (const RfWindow* w = active_window(t_local)) {
    cfg.omega_rf = w->omega();
    cfg.phi_rf = w->phase_ref;
    cfg.delta_rf = w->delta();
    cfg.rf_mode = w->mode;
  }
  return cfg;
}

std::vector<double> Segment::breakpoints() const {
  std::vector<double> pts{0.0};
  for (const auto& w : rf) {
    pts.push_back(w.start);
    pts.push_back(w.end());
  }
  pts.push_back(duration);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  while (pts.size() > 1 && pts.back() > duration) pts.pop_back();
  if (pts.back() != duration) pts.push_back(duration);
  return pts;
}

double Segment::max_frequency(double a, double b, const SpeciesCalibration& cal) const {
  double f = std::max({std::abs(plus.peak), std::abs(minus.peak), std::abs(clock.peak)});
  for (const auto& w : rf) {
    if (w.end() <= a || w.start >= b) continue;
    FieldConfig cfg;
    cfg.omega_rf = w.omega();
    cfg.delta_rf = w.delta();
    cfg.rf_mode = w.mode;
    f = std::max({f, cfg.omega_rf, std::abs(cfg.delta_rf), std::abs(rf_counter_beat(cfg, cal))});
  }
  return hertz(f);
}

TimeDependence Segment::time_dependence(double a, double b, const SpeciesCalibration& cal) const {
  if (plus.time_dependent() || minus.time_dependent() || clock.time_dependent()) {
    return {TimeDependence::Kind::General, 0.0};
  }
  const RfWindow* w = active_window(0.5 * (a + b));
  if (w == nullptr || w->rabi_hz == 0.0) return {TimeDependence::Kind::Static, 0.0};
  if (w->detune_hz != 0.0) return {TimeDependence::Kind::General, 0.0};
  if (w->mode == RfMode::DualResonant) return {TimeDependence::Kind::Static, 0.0};
  FieldConfig cfg;
  cfg.rf_mode = w->mode;
  const double beat = rf_counter_beat(cfg, cal);
  if (beat == 0.0) return {TimeDependence::Kind::Static, 0.0};
  return {TimeDependence::Kind::Periodic, kTwoPi / std::abs(beat)};
}

Segment stirap_half(double t_w, double t_off, double peak, StirapDirection direction) {
  if (!(t_w > 0.0)) throw ValidationError("STIRAP width t_w must be positive");
  if (!(t_off > 0.0)) throw ValidationError("STIRAP offset t_off must be positive");
  if (!(peak > 0.0)) throw ValidationError("STIRAP peak Rabi frequency must be positive");
  const double r = stirap_truncation_radius(t_w);
  if (0.5 * t_off >= r) {
    throw ValidationError("STIRAP offset t_off=" + format_exact(t_off) +
                          " s exceeds the pulse span; the Gaussians never overlap");
  }
  Segment seg;
  seg.kind = SegmentKind::Stirap;
  seg.stirap = StirapSpec{direction, t_w, t_off, hertz(peak)};
  const double amp = angular(seg.stirap.peak_hz);
  if (direction == StirapDirection::Enter) {
    // Omega- leads so the dark state starts on |+1>; stop at the crossing.
    seg.minus = Envelope::gaussian(amp, t_w, r);
    seg.plus = Envelope::gaussian(amp, t_w, r + t_off);
    seg.duration = r + 0.5 * t_off;
    seg.label = "stirap_enter";
  } else {
    seg.minus = Envelope::gaussian(amp, t_w, -0.5 * t_off);
    seg.plus = Envelope::gaussian(amp, t_w, 0.5 * t_off);
    seg.duration = 0.5 * t_off + r;
    seg.label = "stirap_exit";
  }
  return seg;
}

Segment hold(double duration, double omega_mw) {
  if (duration < 0.0) throw ValidationError("hold duration must be non-negative");
  if (omega_mw < 0.0) throw ValidationError("hold Rabi frequency must be non-negative");
  Segment seg;
  seg.kind = SegmentKind::Hold;
  seg.duration = duration;
  seg.hold.mw_hz = hertz(omega_mw);
  const double amp = angular(seg.hold.mw_hz);
  seg.plus = Envelope::constant(amp);
  seg.minus = Envelope::constant(amp);
  seg.label = "hold";
  return seg;
}

Segment wait(double duration) { return hold(duration, 0.0); }

Segment with_rf(const Segment& seg, double omega_rf, double phi_rf, double delta_rf, double start,
                double duration, RfMode mode) {
  Segment out = seg;
  RfWindow w;
  w.start = start;
  w.duration = duration;
  w.rabi_hz = hertz(omega_rf);
  w.phi = phi_rf;
  w.detune_hz = hertz(delta_rf);
  w.mode = mode;
  add_rf_window(out, w);
  return out;
}

Segment mw_pulse(Transition transition, double omega, double duration, double phase) {
  if (!(omega > 0.0)) throw ValidationError("microwave pulse Rabi frequency must be positive");
  if (duration < 0.0) throw ValidationError("microwave pulse duration must be non-negative");
  Segment seg;
  seg.kind = SegmentKind::MwPulse;
  seg.mw = MwPulseSpec{transition, hertz(omega), PulseArea::Explicit, phase};
  seg.duration = duration;
  const Envelope env = Envelope::constant(angular(seg.mw.rabi_hz));
  switch (transition) {
    case Transition::Plus: seg.plus = env; seg.phi_plus = phase; break;
    case Transition::Minus: seg.minus = env; seg.phi_minus = phase; break;
    case Transition::Clock: seg.clock = env; seg.phi_clock = phase; break;
  }
  seg.label = "mw_" + std::string(transition_name(transition));
  return seg;
}

Segment mw_pi_pulse(Transition transition, double omega, double phase) {
  Segment seg = mw_pulse(transition, omega, 0.0, phase);
  seg.mw.area = PulseArea::Pi;
  seg.duration = kPi / angular(seg.mw.rabi_hz);
  return seg;
}

Segment mw_half_pi_pulse(Transition transition, double omega, double phase) {
  Segment seg = mw_pulse(transition, omega, 0.0, phase);
  seg.mw.area = PulseArea::HalfPi;
  seg.duration = 0.5 * kPi / angular(seg.mw.rabi_hz);
  return seg;
}

Segment rf_pulse(double omega_rf, double phi_rf, double delta_rf, double duration, RfMode mode) {
  if (duration < 0.0) throw ValidationError("rf pulse duration must be non-negative");
  Segment seg;
  seg.kind = SegmentKind::RfPulse;
  seg.duration = duration;
  seg.label = "rf";
  return with_rf(seg, omega_rf, phi_rf, delta_rf, 0.0, duration, mode);
}

void Schedule::append(Segment seg) {
  if (seg.duration < 0.0) throw ValidationError("segment '" + seg.label + "' has negative duration");
  if (seg.duration == 0.0) return;
  const double t0 = duration_;
  for (auto& w : seg.rf) {
    const double s = t0 + w.start;
    const double acc = rf_phase_acc_ + rf_detune_ * (s - rf_acc_time_);
    w.phase_ref = w.phi + acc - w.delta() * s;
    rf_detune_ = w.delta();
    rf_phase_acc_ = acc;
    rf_acc_time_ = s;
  }
  starts_.push_back(t0);
  duration_ = t0 + seg.duration;
  segments_.push_back(std::move(seg));
}

void Schedule::add_label(std::string name) { labels_.push_back({std::move(name), duration_}); }

std::size_t Schedule::segment_at(double t) const {
  if (segments_.empty()) throw ValidationError("empty schedule has no controls");
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  if (it == starts_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(starts_.begin(), it) - 1);
}

FieldConfig Schedule::controls(double t) const {
  const std::size_t i = segment_at(t);
  return segments_[i].controls(t - starts_[i]);
}

std::vector<std::string> Schedule::continuity_issues(double rel_tol) const {
  std::vector<std::string> issues;
  auto dressing = [](const Segment& s) {
    return s.kind == SegmentKind::Stirap || s.kind == SegmentKind::Hold;
  };
  for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
    const Segment& a = segments_[i];
    const Segment& b = segments_[i + 1];
    if (!dressing(a) || !dressing(b)) continue;
    if (a.kind != SegmentKind::Stirap && b.kind != SegmentKind::Stirap) continue;
    const double ap = a.plus.value(a.duration), am = a.minus.value(a.duration);
    const double bp = b.plus.value(0.0), bm = b.minus.value(0.0);
    if (!nearly_equal(ap, bp, rel_tol) || !nearly_equal(am, bm, rel_tol)) {
      issues.push_back("dressing amplitude jumps at t=" + format_exact(starts_[i + 1]) + " s between '" +
                       a.label + "' (" + format_exact(hertz(ap)) + " Hz) and '" + b.label + "' (" +
                       format_exact(hertz(bp)) + " Hz)");
    }
  }
  return issues;
}

std::vector<ControlSample> control_dump(const Schedule& schedule, int samples_per_segment) {
  std::vector<ControlSample> out;
  const auto& segs = schedule.segments();
  auto sample = [&](std::size_t i, double local) {
    const FieldConfig c = segs[i].controls(local);
    const double t = schedule.start_time(i) + local;
    ControlSample s;
    s.t = t;
    s.omega_plus = c.omega_mw_plus;
    s.omega_minus = c.omega_mw_minus;
    s.omega_clock = c.omega_mw_clock;
    s.omega_rf = c.omega_rf;
    s.phi_rf = c.omega_rf != 0.0 ? c.phi_rf + c.delta_rf * t : 0.0;
    s.delta_rf = c.delta_rf;
    out.push_back(s);
  };
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (int k = 0; k < samples_per_segment; ++k) {
      sample(i, segs[i].duration * k / samples_per_segment);
    }
  }
  if (!segs.empty()) sample(segs.size() - 1, segs.back().duration);
  return out;
}

void write_control_dump_csv(std::ostream& os, const std::vector<ControlSample>& dump) {
  os << "t_s,omega_plus,omega_minus,omega_clock,omega_rf,phi_rf,delta_rf\n";
  for (const auto& s : dump) {
    os << format_exact(s.t) << ',' << format_exact(s.omega_plus) << ',' << format_exact(s.omega_minus)
       << ',' << format_exact(s.omega_clock) << ',' << format_exact(s.omega_rf) << ','
       << format_exact(s.phi_rf) << ',' << format_exact(s.delta_rf) << '\n';
  }
}

std::vector<AdiabaticityPoint> adiabaticity_profile(const Segment& seg, int samples) {
  using Mat3 = Eigen::Matrix3d;
  using Vec3 = Eigen::Vector3d;
  // basis (|0>, |-1>, |+1>)
  auto eig = [&](double t) {
    const double op = seg.plus.value(t), om = seg.minus.value(t);
    Mat3 h = Mat3::Zero();
    h(0, 1) = h(1, 0) = 0.5 * om;
    h(0, 2) = h(2, 0) = 0.5 * op;
    Eigen::SelfAdjointEigenSolver<Mat3> es(h);
    return es;
  };
  auto aligned = [](Vec3 v, const Vec3& ref) { return v.dot(ref) < 0.0 ? Vec3(-v) : v; };

  std::vector<AdiabaticityPoint> out;
  const double h = 1e-4 * std::max(seg.plus.sigma(), seg.minus.sigma());
  for (int k = 0; k <= samples; ++k) {
    const double t = seg.duration * k / samples;
    const auto es = eig(t);
    const Vec3 dark = es.eigenvectors().col(1);
    const Vec3 up = es.eigenvectors().col(2);
    const Vec3 down = es.eigenvectors().col(0);
    const Vec3 dm = aligned(eig(t - h).eigenvectors().col(1), dark);
    const Vec3 dp = aligned(eig(t + h).eigenvectors().col(1), dark);
    const Vec3 ddot = (dp - dm) / (2.0 * h);
    AdiabaticityPoint p;
    p.t = t;
    p.coupling = std::max(std::abs(up.dot(ddot)), std::abs(down.dot(ddot)));
    p.gap = es.eigenvalues()(2);
    p.ratio = p.gap > 0.0 ? p.coupling / p.gap : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace dsq
