#include "dsq/propagator.hpp"

#include "dsq/errors.hpp"
#include "dsq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace dsq {
namespace {

Operator power(Operator base, std::uint64_t exponent) {
  Operator result = Operator::Identity();
  while (exponent > 0) {
    if (exponent & 1u) result = base * result;
    exponent >>= 1u;
    if (exponent > 0) base = base * base;
  }
  return result;
}

std::size_t steps_for(double span, double dt) {
  if (!std::isfinite(dt)) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
}

PopulationRecord make_record(const std::string& label, double t, const Amplitudes& psi) {
  PopulationRecord r;
  r.label = label;
  r.time = t;
  const StateVector bare(psi, Basis::Bare);
  r.bare = bare.populations();
  r.dressed = to_dressed(bare).populations();
  return r;
}

}  // namespace

void PropagatorConfig::validate() const {
  if (dt_max < 0.0) throw ValidationError("dt_max must be non-negative (0 selects the automatic rule)");
  if (!(norm_tolerance > 0.0)) throw ValidationError("norm tolerance must be positive");
}

Operator unitary_step(const Operator& h, double dt) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  const auto& v = es.eigenvectors();
  Eigen::Matrix<Complex, 4, 1> phases;
  for (int i = 0; i < 4; ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * dt);
  return v * phases.asDiagonal() * v.adjoint();
}

ShotResult evolve(const StateVector& initial, const Schedule& schedule, const NoiseTrajectory& noise,
                  const SpeciesCalibration& cal, const PhysicalConstants& k, const PropagatorConfig& cfg,
                  std::uint64_t shot_index) {
  Amplitudes psi = initial.basis() == Basis::Bare ? initial.amplitudes() : to_bare(initial).amplitudes();
  const bool noisy = !noise.is_constant();
  const double initial_norm = psi.norm();

  ShotResult out;
  out.shot_index = shot_index;
  const auto& segs = schedule.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& seg = segs[i];
    const double t0 = schedule.start_time(i);
    auto hamiltonian = [&](double t_abs) {
      return h_total(seg.controls(t_abs - t0), cal, k, noise.at(t_abs), t_abs);
    };

    const auto bps = seg.breakpoints();
    for (std::size_t j = 0; j + 1 < bps.size(); ++j) {
      const double a = bps[j];
      const double b = bps[j + 1];
      const double span = b - a;
      if (span <= 0.0) continue;
      const double ta = t0 + a;
      // fourth-order Magnus step from two Gauss-Legendre samples
      auto magnus = [&](double t, double h) -> Operator {
        constexpr double g = 0.28867513459481287;  // sqrt(3)/6
        const Operator h1 = hamiltonian(t + (0.5 - g) * h);
        const Operator h2 = hamiltonian(t + (0.5 + g) * h);
        const Operator eff = 0.5 * (h1 + h2) - Complex(0.0, 0.5 * g * h) * (h2 * h1 - h1 * h2);
        return unitary_step(0.5 * (eff + eff.adjoint()), h);
      };

      const double f = seg.max_frequency(a, b, cal);
      double dt = f > 0.0 ? 1.0 / (20.0 * f) : std::numeric_limits<double>::infinity();
      if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);
      if (noisy) dt = std::min(dt, noise.dt());
      const TimeDependence td = seg.time_dependence(a, b, cal);

      if (cfg.method == Method::PiecewiseExponential) {
        if (!noisy && td.kind == TimeDependence::Kind::Static) {
          psi = unitary_step(hamiltonian(ta + 0.5 * span), span) * psi;
        } else if (!noisy && td.kind == TimeDependence::Kind::Periodic && cfg.periodic_shortcut &&
                   span >= 2.0 * td.period) {
          const double period = td.period;
          const std::size_t n = steps_for(period, dt);
          const double h = period / static_cast<double>(n);
          Operator u_period = Operator::Identity();
          for (std::size_t s = 0; s < n; ++s) {
            u_period = magnus(ta + s * h, h) * u_period;
          }
          const auto cycles = static_cast<std::uint64_t>(std::floor(span / period));
          psi = power(u_period, cycles) * psi;
          const double tr = ta + static_cast<double>(cycles) * period;
          const double rem = b + t0 - tr;
          if (rem > 0.0) {
            const std::size_t m = steps_for(rem, dt);
            const double hr = rem / static_cast<double>(m);
            for (std::size_t s = 0; s < m; ++s) psi = magnus(tr + s * hr, hr) * psi;
          }
        } else {
          const std::size_t n = steps_for(span, dt);
          const double h = span / static_cast<double>(n);
          for (std::size_t s = 0; s < n; ++s) psi = magnus(ta + s * h, h) * psi;
        }
      } else {
        const Operator hmid = hamiltonian(ta + 0.5 * span);
        const double scale = std::max(hmid.cwiseAbs().rowwise().sum().maxCoeff(), kTwoPi * f);
        if (scale > 0.0) dt = std::min(dt, 0.02 / scale);
        const std::size_t n = steps_for(span, dt);
        const double h = span / static_cast<double>(n);
        const Complex mi(0.0, -1.0);
        // stage times touch the interval edges; keep the controls of this interval
        const double last = std::nextafter(b, a);
        auto inside = [&](double t_abs) {
          return h_total(seg.controls(std::clamp(t_abs - t0, a, last)), cal, k, noise.at(t_abs), t_abs);
        };
        for (std::size_t s = 0; s < n; ++s) {
          const double t = ta + s * h;
          const Operator h0 = inside(t);
          const Operator h1 = inside(t + 0.5 * h);
          const Operator h2 = inside(t + h);
          const Amplitudes k1 = mi * (h0 * psi);
          const Amplitudes k2 = mi * (h1 * (psi + 0.5 * h * k1));
          const Amplitudes k3 = mi * (h1 * (psi + 0.5 * h * k2));
          const Amplitudes k4 = mi * (h2 * (psi + h * k3));
          psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
    }

    const double drift = std::abs(psi.norm() - initial_norm);
    if (drift > cfg.norm_tolerance) {
      throw IntegrationError("norm drift " + format_exact(drift) + " exceeds tolerance in segment " +
                             std::to_string(i) + " ('" + seg.label + "')");
    }
    out.records.push_back(make_record(seg.label, t0 + seg.duration, psi));
  }
  out.final_state = StateVector(psi, Basis::Bare);
  return out;
}

std::array<double, 4> dressed_populations(const ShotResult& result) {
  const StateVector& s = result.final_state;
  return (s.basis() == Basis::Dressed ? s : to_dressed(s)).populations();
}

std::vector<ResultRow> run_ensemble(const std::vector<SweepPoint>& points, const EnsembleConfig& cfg) {
  cfg.noise.validate();
  cfg.detector.validate();
  cfg.prep.validate();
  cfg.propagator.validate();
  if (cfg.shots < 1) throw ValidationError("need at least one shot per point");

  NoiseModel noise = cfg.noise;
  noise.seed = cfg.seed;
  const auto shots = static_cast<std::size_t>(cfg.shots);
  const int workers = std::max(1, cfg.workers);

  struct ShotOutcome {
    bool bright = false;
    double p_model = 0.0;
    std::array<double, 4> final_bare{};
    std::vector<PopulationRecord> records;
  };

  std::vector<ResultRow> rows;
  rows.reserve(points.size());
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const Schedule& schedule = points[pi].schedule;
    const double duration = schedule.duration();

    // Without noise, a shot is fixed by its prepared level; evolve each once.
    std::map<int, ShotResult> cache;
    if (noise.is_zero()) {
      const auto zero = NoiseTrajectory::constant(0.0, duration);
      std::vector<int> levels{index(BareLevel::Zero)};
      if (cfg.prep.p_prep_error > 0.0) levels = {0, 1, 2, 3};
      for (int lvl : levels) {
        cache.emplace(lvl, evolve(StateVector::bare(static_cast<BareLevel>(lvl)), schedule, zero, cfg.calibration,
                                  cfg.constants, cfg.propagator));
      }
    }

    std::vector<ShotOutcome> outcomes(shots);
    auto run_shot = [&](std::size_t s) {
      const std::uint64_t key = static_cast<std::uint64_t>(pi) * shots + s;
      auto prep_rng = keyed_rng(cfg.seed, key, Stream::Preparation);
      const StateVector start = prepare(cfg.prep, prep_rng);
      int level = 0;
      for (int l = 0; l < 4; ++l) {
        if (std::abs(start[l]) > 0.5) level = l;
      }
      ShotResult r;
      if (!cache.empty()) {
        r = cache.at(level);
      } else if (duration > 0.0) {
        const auto traj = sample_trajectory(noise, duration, std::numeric_limits<double>::infinity(), key);
        r = evolve(start, schedule, traj, cfg.calibration, cfg.constants, cfg.propagator, key);
      } else {
        r.final_state = start;
      }
      auto det_rng = keyed_rng(cfg.seed, key, Stream::Detection);
      ShotOutcome& o = outcomes[s];
      o.bright = detect(r.final_state, cfg.detector, det_rng).bright;
      o.p_model = bright_probability(r.final_state, cfg.detector);
      o.final_bare = r.final_state.populations();
      o.records = std::move(r.records);
    };

    if (workers == 1 || shots == 1) {
      for (std::size_t s = 0; s < shots; ++s) run_shot(s);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t s = static_cast<std::size_t>(w); s < shots; s += static_cast<std::size_t>(workers)) {
              run_shot(s);
            }
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    ResultRow row;
    row.x = points[pi].x;
    row.n_shots = cfg.shots;
    double p_model = 0.0;
    for (const auto& o : outcomes) {
      if (o.bright) ++row.bright;
      p_model += o.p_model;
      for (int l = 0; l < 4; ++l) row.final_bare[l] += o.final_bare[l];
    }
    row.records = outcomes.front().records;
    for (auto& rec : row.records) {
      rec.bare.fill(0.0);
      rec.dressed.fill(0.0);
    }
    for (const auto& o : outcomes) {
      for (std::size_t r = 0; r < row.records.size() && r < o.records.size(); ++r) {
        for (int l = 0; l < 4; ++l) {
          row.records[r].bare[l] += o.records[r].bare[l];
          row.records[r].dressed[l] += o.records[r].dressed[l];
        }
      }
    }
    const double inv = 1.0 / static_cast<double>(shots);
    for (auto& rec : row.records) {
      for (int l = 0; l < 4; ++l) {
        rec.bare[l] *= inv;
        rec.dressed[l] *= inv;
      }
    }
    for (auto& v : row.final_bare) v *= inv;
    row.p_model = p_model * inv;
    row.p_bright = static_cast<double>(row.bright) / static_cast<double>(shots);
    const auto ci = wilson_interval(row.bright, row.n_shots);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dsq
