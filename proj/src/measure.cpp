#include "dsq/measure.hpp"

#include "dsq/errors.hpp"
#include "dsq/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dsq {

DetectorModel DetectorModel::ideal() {
  DetectorModel d;
  d.lambda_bright = 100.0;
  d.lambda_dark = 0.0;
  d.p_leak_bright_to_dark = 0.0;
  d.p_leak_dark_to_bright = 0.0;
  d.threshold = 1;
  return d;
}

void DetectorModel::validate() const {
  if (!(lambda_dark >= 0.0) || !(lambda_bright > lambda_dark)) {
    throw ValidationError("detector requires lambda_bright > lambda_dark >= 0");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_leak_bright_to_dark) || !prob(p_leak_dark_to_bright)) {
    throw ValidationError("detector leak probabilities must lie in [0, 1]");
  }
  if (threshold < 0) throw ValidationError("detector threshold must be non-negative");
}

void PrepModel::validate() const {
  if (!(p_prep_error >= 0.0 && p_prep_error <= 1.0)) {
    throw ValidationError("preparation error probability must lie in [0, 1]");
  }
}

double poisson_tail(double lambda, int threshold) {
  if (threshold <= 0) return 1.0;
  if (lambda <= 0.0) return 0.0;
  // 1 - CDF(threshold - 1)
  double term = std::exp(-lambda);
  double cdf = term;
  for (int k = 1; k < threshold; ++k) {
    term *= lambda / k;
    cdf += term;
  }
  return std::max(0.0, 1.0 - cdf);
}

StateVector prepare(const PrepModel& prep, std::mt19937_64& rng) {
  if (prep.p_prep_error > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < prep.p_prep_error) {
      static constexpr BareLevel kF1[] = {BareLevel::Minus, BareLevel::ZeroPrime, BareLevel::Plus};
      std::uniform_int_distribution<int> pick(0, 2);
      return StateVector::bare(kF1[pick(rng)]);
    }
  }
  return StateVector::bare(BareLevel::Zero);
}

double f1_population(const StateVector& state) {
  if (state.basis() != Basis::Bare) throw BasisError("detection needs a bare-basis state");
  const auto p = state.populations();
  const double total = p[0] + p[1] + p[2] + p[3];
  return std::clamp((p[1] + p[2] + p[3]) / total, 0.0, 1.0);
}

Detection detect(const StateVector& state, const DetectorModel& det, std::mt19937_64& rng) {
  const double p1 = f1_population(state);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  bool f1 = u(rng) < p1;
  if (f1 && det.p_leak_bright_to_dark > 0.0 && u(rng) < det.p_leak_bright_to_dark) {
    f1 = false;
  } else if (!f1 && det.p_leak_dark_to_bright > 0.0 && u(rng) < det.p_leak_dark_to_bright) {
    f1 = true;
  }
  const double lambda = f1 ? det.lambda_bright : det.lambda_dark;
  Detection d;
  if (lambda > 0.0) d.photon_count = std::poisson_distribution<int>(lambda)(rng);
  d.bright = d.photon_count >= det.threshold;
  return d;
}

double bright_probability(const StateVector& state, const DetectorModel& det) {
  const double p1 = f1_population(state);
  const double qb = poisson_tail(det.lambda_bright, det.threshold);
  const double qd = poisson_tail(det.lambda_dark, det.threshold);
  const double given_f1 = (1.0 - det.p_leak_bright_to_dark) * qb + det.p_leak_bright_to_dark * qd;
  const double given_f0 = (1.0 - det.p_leak_dark_to_bright) * qd + det.p_leak_dark_to_bright * qb;
  return p1 * given_f1 + (1.0 - p1) * given_f0;
}

FidelityReport analytic_fidelity(const DetectorModel& det) {
  FidelityReport r;
  r.f_bright = bright_probability(StateVector::bare(BareLevel::Plus), det);
  r.f_dark = 1.0 - bright_probability(StateVector::bare(BareLevel::Zero), det);
  r.f_mean = 0.5 * (r.f_bright + r.f_dark);
  return r;
}

FidelityReport fidelity_report(const DetectorModel& det, int n, std::uint64_t seed) {
  det.validate();
  if (n < 1000) throw ValidationError("fidelity_report needs at least 1000 shots");
  const StateVector bright_state = StateVector::bare(BareLevel::Plus);
  const StateVector dark_state = StateVector::bare(BareLevel::Zero);
  int bright_hits = 0;
  int dark_hits = 0;
  for (int i = 0; i < n; ++i) {
    auto rng_b = keyed_rng(seed, 2 * static_cast<std::uint64_t>(i), Stream::Detection);
    auto rng_d = keyed_rng(seed, 2 * static_cast<std::uint64_t>(i) + 1, Stream::Detection);
    if (detect(bright_state, det, rng_b).bright) ++bright_hits;
    if (!detect(dark_state, det, rng_d).bright) ++dark_hits;
  }
  FidelityReport r;
  r.shots = n;
  r.f_bright = static_cast<double>(bright_hits) / n;
  r.f_dark = static_cast<double>(dark_hits) / n;
  r.f_mean = 0.5 * (r.f_bright + r.f_dark);
  return r;
}

}  // namespace dsq
