#include "dsq/noise.hpp"

#include "dsq/errors.hpp"
#include "dsq/propagator.hpp"
#include "dsq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace dsq {

void NoiseModel::validate() const {
  if (quasi_static_sigma < 0.0 || ou_sigma < 0.0 || mains_amplitude < 0.0) {
    throw ValidationError("noise amplitudes must be non-negative");
  }
  if (ou_sigma > 0.0 && !(ou_tau > 0.0)) {
    throw ValidationError("OU correlation time must be positive when ou_sigma > 0");
  }
  if (mains_amplitude > 0.0 && !(mains_freq > 0.0)) {
    throw ValidationError("mains frequency must be positive when mains noise is on");
  }
}

double NoiseModel::max_spacing() const {
  double s = std::numeric_limits<double>::infinity();
  if (ou_sigma > 0.0) s = std::min(s, ou_tau / 10.0);
  if (mains_amplitude > 0.0) s = std::min(s, 1.0 / (20.0 * mains_freq));
  return s;
}

NoiseTrajectory NoiseTrajectory::constant(double value, double duration) {
  NoiseTrajectory t(duration > 0.0 ? duration : 1.0, {value, value});
  t.constant_ = true;
  return t;
}

double NoiseTrajectory::at(double t) const {
  if (values_.empty()) return 0.0;
  if (constant_ || values_.size() == 1) return values_.front();
  const double x = t / dt_;
  if (x <= 0.0) return values_.front();
  const auto last = values_.size() - 1;
  if (x >= static_cast<double>(last)) return values_.back();
  const auto i = static_cast<std::size_t>(x);
  const double f = x - static_cast<double>(i);
  return values_[i] + f * (values_[i + 1] - values_[i]);
}

NoiseTrajectory sample_trajectory(const NoiseModel& model, double duration, double dt,
                                  std::uint64_t shot_index) {
  model.validate();
  if (!(duration > 0.0) || !(dt > 0.0)) throw ValidationError("trajectory duration and dt must be positive");

  double qs = 0.0;
  if (model.quasi_static_sigma > 0.0) {
    auto rng = keyed_rng(model.seed, shot_index, Stream::QuasiStatic);
    qs = model.quasi_static_sigma * std::normal_distribution<double>(0.0, 1.0)(rng);
  }
  if (!model.time_dependent()) return NoiseTrajectory::constant(qs, duration);

  const double spacing = std::min(dt, model.max_spacing());
  const auto n = static_cast<std::size_t>(std::ceil(duration / spacing)) + 1;
  std::vector<double> values(n, qs);

  if (model.ou_sigma > 0.0) {
    auto rng = keyed_rng(model.seed, shot_index, Stream::OrnsteinUhlenbeck);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double decay = std::exp(-spacing / model.ou_tau);
    const double kick = model.ou_sigma * std::sqrt(1.0 - decay * decay);
    double b = model.ou_sigma * normal(rng);  // stationary start
    for (std::size_t i = 0; i < n; ++i) {
      values[i] += b;
      b = b * decay + kick * normal(rng);
    }
  }
  if (model.mains_amplitude > 0.0) {
    const double w = kTwoPi * model.mains_freq;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] += model.mains_amplitude * std::sin(w * spacing * static_cast<double>(i) + model.mains_phase);
    }
  }
  return NoiseTrajectory(spacing, std::move(values));
}

double quasi_static_ramsey_contrast(double sigma_b, double t, const PhysicalConstants& k) {
  const double x = k.s1 * sigma_b * t;
  return std::exp(-0.5 * x * x);
}

namespace {

// Mean Ramsey contrast 2P(+1)-1 at delay t with common random numbers xi.
double simulated_contrast(double sigma_b, double t, const std::vector<double>& xi,
                          const PhysicalConstants& k, double mw_rabi) {
  Schedule s;
  s.append(mw_half_pi_pulse(Transition::Plus, mw_rabi));
  s.append(wait(t));
  s.append(mw_half_pi_pulse(Transition::Plus, mw_rabi));
  const SpeciesCalibration cal = SpeciesCalibration::from_field(9.80, k);
  PropagatorConfig cfg;
  double sum = 0.0;
  for (double x : xi) {
    const auto traj = NoiseTrajectory::constant(sigma_b * x, s.duration());
    const ShotResult r = evolve(StateVector::bare(BareLevel::Zero), s, traj, cal, k, cfg);
    sum += 2.0 * r.final_state.populations()[index(BareLevel::Plus)] - 1.0;
  }
  return sum / static_cast<double>(xi.size());
}

}  // namespace

CalibrationResult calibrate_quasi_static(double target_t2, const PhysicalConstants& k,
                                         const CalibrationOptions& opt) {
  if (!(target_t2 > 0.0)) throw ValidationError("target T2 must be positive");
  CalibrationResult out;
  out.analytic_seed = std::sqrt(2.0) / (k.s1 * target_t2);
  if (std::isinf(target_t2)) return out;

  std::vector<double> xi(static_cast<std::size_t>(opt.shots));
  for (std::size_t i = 0; i < xi.size(); ++i) {
    auto rng = keyed_rng(opt.seed, i, Stream::QuasiStatic);
    xi[i] = std::normal_distribution<double>(0.0, 1.0)(rng);
  }
  const double target = std::exp(-1.0);
  auto f = [&](double sigma) { return simulated_contrast(sigma, target_t2, xi, k, opt.mw_rabi) - target; };

  double lo = 0.5 * out.analytic_seed;
  double hi = 2.0 * out.analytic_seed;
  int expand = 0;
  while (f(lo) < 0.0 && expand++ < 10) lo *= 0.5;
  while (f(hi) > 0.0 && expand++ < 20) hi *= 2.0;
  if (f(lo) < 0.0 || f(hi) > 0.0) throw FitError("calibrate_quasi_static: could not bracket the target contrast");

  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    out.iterations = it;
    if ((hi - lo) <= opt.rel_tol * mid) {
      out.sigma_b = 0.5 * (lo + hi);
      out.contrast_at_t2 = f(out.sigma_b) + target;
      return out;
    }
  }
  throw FitError("calibrate_quasi_static: no convergence after " + std::to_string(opt.max_iterations) +
                 " iterations");
}

void write_trajectory_csv(std::ostream& os, const NoiseTrajectory& traj) {
  os << "t_s,delta_b_G\n";
  for (std::size_t i = 0; i < traj.values().size(); ++i) {
    os << format_exact(traj.dt() * static_cast<double>(i)) << ',' << format_exact(traj.values()[i]) << '\n';
  }
}

}  // namespace dsq
