#include "dsq/errors.hpp"
#include "dsq/noise.hpp"
#include "dsq/propagator.hpp"

#include <doctest.h>

#include <limits>
#include <numeric>

using namespace dsq;

TEST_CASE("noise: trajectories are deterministic per (seed, shot)") {
  NoiseModel m;
  m.quasi_static_sigma = 1e-5;
  m.ou_sigma = 2e-4;
  m.ou_tau = 1e-4;
  m.mains_amplitude = 1e-4;
  m.seed = 7;
  const auto a = sample_trajectory(m, 5e-3, 1e-5, 3);
  const auto b = sample_trajectory(m, 5e-3, 1e-5, 3);
  const auto c = sample_trajectory(m, 5e-3, 1e-5, 4);
  CHECK(a.values() == b.values());
  CHECK(a.values() != c.values());
  CHECK(a.dt() <= m.max_spacing());
  CHECK(a.duration() >= 5e-3);
}

TEST_CASE("noise: OU samples have the set variance and correlation time") {
  NoiseModel m;
  m.ou_sigma = 1.3e-3;
  m.ou_tau = 100e-6;
  m.seed = 1;
  double sum = 0.0, sum2 = 0.0, lag = 0.0;
  std::size_t n = 0, nl = 0;
  const int lag_steps = 10;  // one tau at the tau/10 spacing
  for (std::uint64_t shot = 0; shot < 200; ++shot) {
    const auto t = sample_trajectory(m, 10e-3, 1.0, shot);
    const auto& v = t.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum += v[i];
      sum2 += v[i] * v[i];
      ++n;
      if (i + lag_steps < v.size()) {
        lag += v[i] * v[i + lag_steps];
        ++nl;
      }
    }
  }
  const double var = sum2 / n - std::pow(sum / n, 2);
  CHECK(std::sqrt(var) == doctest::Approx(1.3e-3).epsilon(0.03).scale(0.0));
  CHECK(lag / nl / var == doctest::Approx(std::exp(-1.0)).epsilon(0.05).scale(0.0));
}

TEST_CASE("noise: mains component is a pure sinusoid") {
  NoiseModel m;
  m.mains_amplitude = 2e-4;
  m.mains_freq = 50.0;
  m.mains_phase = 0.5;
  const auto t = sample_trajectory(m, 40e-3, 1.0, 0);
  for (double x : {0.0, 3.3e-3, 17e-3}) {
    CHECK(t.at(x) == doctest::Approx(2e-4 * std::sin(kTwoPi * 50.0 * x + 0.5)).epsilon(0.02).scale(2e-4));
  }
}

TEST_CASE("noise: simulated quasi-static Ramsey decay matches the Gaussian law") {
  const PhysicalConstants k;
  const double sigma = 3e-6;
  EnsembleConfig cfg;
  cfg.noise.quasi_static_sigma = sigma;
  cfg.detector = DetectorModel::ideal();
  cfg.shots = 2000;
  std::vector<SweepPoint> pts;
  for (double t : {10e-3, 30e-3, 60e-3}) {
    Schedule s;
    s.append(mw_half_pi_pulse(Transition::Plus, angular(100e3)));
    s.append(wait(t));
    s.append(mw_half_pi_pulse(Transition::Plus, angular(100e3)));
    pts.push_back({t, s});
  }
  const auto rows = run_ensemble(pts, cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double contrast = 2.0 * rows[i].p_model - 1.0;
    CHECK(contrast == doctest::Approx(quasi_static_ramsey_contrast(sigma, pts[i].x, k)).epsilon(0.03).scale(1.0));
  }
}

TEST_CASE("noise: calibration puts the 1/e point at T2") {
  const PhysicalConstants k;
  CalibrationOptions opt;
  opt.shots = 1000;
  const auto r = calibrate_quasi_static(40e-3, k, opt);
  CHECK(r.contrast_at_t2 == doctest::Approx(std::exp(-1.0)).epsilon(1e-3).scale(0.0));
  CHECK(r.sigma_b == doctest::Approx(r.analytic_seed).epsilon(0.1).scale(0.0));
  CHECK_THROWS_AS(calibrate_quasi_static(-1.0, k), ValidationError);
}

TEST_CASE("noise: invalid models are rejected") {
  NoiseModel m;
  m.ou_sigma = 1e-3;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m.ou_tau = 1e-3;
  m.quasi_static_sigma = -1.0;
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("noise: silent model gives a zero trajectory") {
  const auto t = sample_trajectory(NoiseModel{}, 5e-3, 1e-4, 9);
  for (double v : t.values()) CHECK(v == 0.0);
  CHECK(t.at(2.5e-3) == 0.0);
}

TEST_CASE("noise: mains is identical in every shot") {
  NoiseModel m;
  m.mains_amplitude = 1e-4;
  m.mains_phase = 1.2;
  m.seed = 4;
  const auto a = sample_trajectory(m, 20e-3, 1e-4, 0);
  for (std::uint64_t shot : {1, 17, 12345}) CHECK(sample_trajectory(m, 20e-3, 1e-4, shot).values() == a.values());
}

TEST_CASE("noise: OU variance at a fixed time across shots") {
  NoiseModel m;
  m.ou_sigma = 1e-3;
  m.ou_tau = 50e-6;
  m.seed = 2;
  const int shots = 10000;
  for (double t : {0.0, 1e-3}) {
    double sum = 0.0, sum2 = 0.0;
    for (int shot = 0; shot < shots; ++shot) {
      const double v = sample_trajectory(m, 1e-3, 1e-5, static_cast<std::uint64_t>(shot)).at(t);
      sum += v;
      sum2 += v * v;
    }
    const double var = sum2 / shots - std::pow(sum / shots, 2);
    CHECK(var == doctest::Approx(1e-6).epsilon(0.03).scale(0.0));
  }
}

TEST_CASE("noise: T2 of 40 ms calibrates to about 4 uG") {
  const PhysicalConstants k;
  CalibrationOptions opt;
  opt.shots = 1000;
  const auto r = calibrate_quasi_static(40e-3, k, opt);
  CHECK(r.sigma_b == doctest::Approx(4.0e-6).epsilon(0.1).scale(0.0));
  CHECK(r.analytic_seed == doctest::Approx(std::sqrt(2.0) / (k.s1 * 40e-3)).epsilon(1e-15).scale(0.0));
  CHECK(calibrate_quasi_static(std::numeric_limits<double>::infinity(), k).sigma_b == 0.0);
  CHECK(calibrate_quasi_static(1e3, k, opt).sigma_b < 1e-9);
}
