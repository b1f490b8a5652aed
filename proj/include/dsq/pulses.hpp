#pragma once

#include "dsq/hamiltonian.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dsq {

enum class Transition { Plus, Minus, Clock };
enum class StirapDirection { Enter, Exit };
enum class SegmentKind { MwPulse, Stirap, Hold, RfPulse };

/// Rotation angle a pulse was requested with. Explicit durations keep the
/// value given by the user; the others derive it from the Rabi frequency.
enum class PulseArea { Explicit, Pi, HalfPi };

std::string_view transition_name(Transition t);

/// Amplitude of one field (rad/s). Gaussian t_w is the full width at half
/// maximum; center is in segment-local time.
struct Envelope {
  enum class Kind { Constant, Gaussian };

  Kind kind = Kind::Constant;
  double peak = 0.0;
  double t_w = 0.0;
  double center = 0.0;

  static Envelope constant(double value) { return {Kind::Constant, value, 0.0, 0.0}; }
  static Envelope gaussian(double peak, double t_w, double center) {
    return {Kind::Gaussian, peak, t_w, center};
  }

  double sigma() const;
  double value(double t) const;
  bool time_dependent() const { return kind == Kind::Gaussian && peak != 0.0; }
};

/// sigma of a Gaussian from its FWHM.
double fwhm_to_sigma(double t_w);

/// Half-width at which a Gaussian envelope is cut off (1e-4 of its peak).
double stirap_truncation_radius(double t_w);

/// Envelope amplitude where the two STIRAP Gaussians cross.
double stirap_crossing_amplitude(double t_w, double t_off, double peak);

/// Rectangular rf drive inside a segment. Frequencies are kept in Hz as the
/// canonical value; angular values are derived from them.
struct RfWindow {
  double start = 0.0;
  double duration = 0.0;
  double rabi_hz = 0.0;
  double phi = 0.0;
  double detune_hz = 0.0;
  RfMode mode = RfMode::SinglePlus;
  PulseArea area = PulseArea::Explicit;
  bool explicit_start = true;
  // Phase referenced to absolute time zero, filled in when the segment is
  // appended to a Schedule so the rf phase stays continuous across windows.
  double phase_ref = 0.0;

  double omega() const { return angular(rabi_hz); }
  double delta() const { return angular(detune_hz); }
  double end() const { return start + duration; }
};

/// Effective |0'> <-> |D> Rabi frequency of an rf drive of strength omega_rf.
double effective_rf_rabi(double omega_rf, RfMode mode);

/// How the Hamiltonian varies over a sub-interval with no breakpoints.
struct TimeDependence {
  enum class Kind { Static, Periodic, General };
  Kind kind = Kind::Static;
  double period = 0.0;
};

struct MwPulseSpec {
  Transition transition = Transition::Plus;
  double rabi_hz = 0.0;
  PulseArea area = PulseArea::Pi;
  double phase = 0.0;
};

struct StirapSpec {
  StirapDirection direction = StirapDirection::Enter;
  double t_w = 0.0;
  double t_off = 0.0;
  double peak_hz = 0.0;
};

struct HoldSpec {
  double mw_hz = 0.0;
};

/// One timed block of controls. Immutable once appended to a Schedule.
struct Segment {
  SegmentKind kind = SegmentKind::Hold;
  double duration = 0.0;
  Envelope plus;
  Envelope minus;
  Envelope clock;
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double phi_clock = 0.0;
  std::vector<RfWindow> rf;
  std::string label;

  MwPulseSpec mw;
  StirapSpec stirap;
  HoldSpec hold;

  FieldConfig controls(double t_local) const;
  const RfWindow* active_window(double t_local) const;

  /// Local times where the controls may jump: 0, rf window edges, duration.
  std::vector<double> breakpoints() const;

  /// Largest frequency scale (Hz) active anywhere in [a, b).
  double max_frequency(double a, double b, const SpeciesCalibration& cal) const;

  TimeDependence time_dependence(double a, double b, const SpeciesCalibration& cal) const;
};

Segment stirap_half(double t_w, double t_off, double peak, StirapDirection direction);
Segment hold(double duration, double omega_mw);
Segment wait(double duration);
Segment with_rf(const Segment& seg, double omega_rf, double phi_rf, double delta_rf, double start,
                double duration, RfMode mode = RfMode::SinglePlus);
Segment mw_pulse(Transition transition, double omega, double duration, double phase = 0.0);
Segment mw_pi_pulse(Transition transition, double omega, double phase = 0.0);
Segment mw_half_pi_pulse(Transition transition, double omega, double phase = 0.0);
Segment rf_pulse(double omega_rf, double phi_rf, double delta_rf, double duration,
                 RfMode mode = RfMode::SinglePlus);

struct ScheduleSettings {
  std::optional<double> b_field;  // gauss
  std::optional<RfMode> rf_mode;
};

struct ScheduleLabel {
  std::string name;
  double time = 0.0;
};

/// Ordered, contiguous sequence of segments.
class Schedule {
 public:
  /// Zero-duration segments are elided.
  void append(Segment seg);
  void add_label(std::string name);

  const std::vector<Segment>& segments() const { return segments_; }
  double start_time(std::size_t i) const { return starts_[i]; }
  double duration() const { return duration_; }
  bool empty() const { return segments_.empty(); }
  const std::vector<ScheduleLabel>& labels() const { return labels_; }

  ScheduleSettings& settings() { return settings_; }
  const ScheduleSettings& settings() const { return settings_; }

  /// Segment index containing absolute time t (last segment for t == end).
  std::size_t segment_at(double t) const;
  FieldConfig controls(double t) const;

  /// Dressing-field jumps at boundaries inside STIRAP/hold chains.
  std::vector<std::string> continuity_issues(double rel_tol = 1e-12) const;

 private:
  std::vector<Segment> segments_;
  std::vector<double> starts_;
  std::vector<ScheduleLabel> labels_;
  ScheduleSettings settings_;
  double duration_ = 0.0;
  double rf_detune_ = 0.0;
  double rf_phase_acc_ = 0.0;
  double rf_acc_time_ = 0.0;
};

struct ControlSample {
  double t = 0.0;
  double omega_plus = 0.0;
  double omega_minus = 0.0;
  double omega_clock = 0.0;
  double omega_rf = 0.0;
  double phi_rf = 0.0;  // instantaneous rf phase
  double delta_rf = 0.0;
};

std::vector<ControlSample> control_dump(const Schedule& schedule, int samples_per_segment = 32);
void write_control_dump_csv(std::ostream& os, const std::vector<ControlSample>& dump);

struct AdiabaticityPoint {
  double t = 0.0;
  double coupling = 0.0;  // |<bright|d/dt dark>|
  double gap = 0.0;       // dark-to-bright energy gap, rad/s
  double ratio = 0.0;
};

/// Nonadiabatic coupling over gap along a STIRAP segment, from numerically
/// diagonalized instantaneous eigenvectors.
std::vector<AdiabaticityPoint> adiabaticity_profile(const Segment& seg, int samples = 400);

}  // namespace dsq
