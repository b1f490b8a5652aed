#include "dsq/hamiltonian.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace dsq;

namespace {
constexpr int k0 = 0, kM = 1, kZ = 2, kP = 3;

std::array<double, 4> sorted_eigenvalues(const Operator& h) {
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  std::array<double, 4> v{};
  for (int i = 0; i < 4; ++i) v[i] = es.eigenvalues()(i);
  std::sort(v.begin(), v.end());
  return v;
}
}  // namespace

TEST_CASE("hamiltonian: dressing matrix elements match a hand-built operator") {
  FieldConfig c;
  c.omega_mw_plus = 2.0;
  c.omega_mw_minus = 3.0;
  c.phi_mw_plus = 0.3;
  c.phi_mw_minus = -1.1;
  Operator ref = Operator::Zero();
  ref(kP, k0) = 1.0 * std::polar(1.0, -0.3);
  ref(kM, k0) = 1.5 * std::polar(1.0, 1.1);
  ref(k0, kP) = std::conj(ref(kP, k0));
  ref(k0, kM) = std::conj(ref(kM, k0));
  CHECK((h_dressing(c) - ref).norm() < 1e-15);
}

TEST_CASE("hamiltonian: equal dressing fields give 0, 0, +-Omega/sqrt2 and a dark |D>") {
  for (double f : {1e3, 16e3, 25e3, 1e6}) {
    const double w = angular(f);
    FieldConfig c;
    c.omega_mw_plus = c.omega_mw_minus = w;
    const Operator h = h_dressing(c);
    const auto ev = sorted_eigenvalues(h);
    const double s = w / std::sqrt(2.0);
    CHECK(std::abs(ev[0] + s) <= 1e-12 * s);
    CHECK(std::abs(ev[1]) <= 1e-12 * s);
    CHECK(std::abs(ev[2]) <= 1e-12 * s);
    CHECK(std::abs(ev[3] - s) <= 1e-12 * s);
    const Amplitudes d = to_bare(StateVector::dressed(DressedLevel::Dark)).amplitudes();
    CHECK((h * d).norm() <= 1e-12 * w);
    // u and d are the +- eigenvectors
    const Amplitudes u = to_bare(StateVector::dressed(DressedLevel::Up)).amplitudes();
    CHECK((h * u - s * u).norm() <= 1e-12 * w);
  }
}

TEST_CASE("hamiltonian: every term is Hermitian") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e5, 1e5);
  const PhysicalConstants k;
  const auto cal = SpeciesCalibration::from_field(9.8, k);
  for (RfMode m : {RfMode::SinglePlus, RfMode::SingleMinus, RfMode::DualResonant}) {
    for (int i = 0; i < 50; ++i) {
      FieldConfig c;
      c.omega_mw_plus = u(rng);
      c.omega_mw_minus = u(rng);
      c.omega_mw_clock = u(rng);
      c.phi_mw_plus = u(rng);
      c.omega_rf = u(rng);
      c.phi_rf = u(rng);
      c.delta_rf = u(rng);
      c.rf_mode = m;
      CHECK(is_hermitian(h_total(c, cal, k, 1e-3 * u(rng), 1e-3 * std::abs(u(rng)))));
    }
  }
}

TEST_CASE("hamiltonian: second-order Zeeman splitting at 9.80 G") {
  const PhysicalConstants k;
  const double dw = hertz(second_order_zeeman(9.80, k));
  CHECK(dw == doctest::Approx(-310.0 * 9.80 * 9.80).epsilon(1e-12).scale(0.0));
  CHECK(dw > -30e3);
  CHECK(dw < -28e3);
  const auto [p, m] = zeeman_splittings(9.80, k);
  CHECK(hertz(p - m) == doctest::Approx(dw).epsilon(1e-9).scale(0.0));
  CHECK(hertz(0.5 * (p + m)) == doctest::Approx(13.7e6).epsilon(1e-12).scale(0.0));
}

TEST_CASE("hamiltonian: c2 agrees with the Breit-Rabi shift of |0'>") {
  // E(F=1, m=0) rises by (gJ muB B)^2 / (4 h nu_hf); the m=+-1 levels are
  // linear, so omega_B+ - omega_B- = -(gJ muB B)^2 / (2 h nu_hf).
  const double mu_b_over_h = 1.39962449e6;  // Hz per G
  const double g_j = 2.00231930;
  const double nu_hf = 12.6428121e9;
  const double c2 = -std::pow(g_j * mu_b_over_h, 2) / (2.0 * nu_hf);
  CHECK(hertz(PhysicalConstants{}.c2) == doctest::Approx(c2).epsilon(0.01).scale(0.0));
}

TEST_CASE("hamiltonian: dual rf coupling to |D> follows sin(phi)") {
  const PhysicalConstants k;
  auto cal = SpeciesCalibration::from_field(9.8, k);
  cal.delta_omega = 0.0;
  const Amplitudes d = to_bare(StateVector::dressed(DressedLevel::Dark)).amplitudes();
  const Amplitudes z = StateVector::bare(BareLevel::ZeroPrime).amplitudes();
  for (double phi = 0.0; phi < kTwoPi; phi += 0.3) {
    FieldConfig c;
    c.omega_rf = 100.0;
    c.phi_rf = phi;
    c.rf_mode = RfMode::DualResonant;
    const Complex g = d.dot(h_rf(c, cal, 0.0) * z);
    CHECK(std::abs(g) == doctest::Approx(100.0 * std::abs(std::sin(phi)) / std::sqrt(2.0)).epsilon(1e-12).scale(100.0));
  }
}

TEST_CASE("hamiltonian: single-field rf couples |D> with Omega/(2 sqrt2) and beats at delta_omega") {
  const PhysicalConstants k;
  const auto cal = SpeciesCalibration::from_field(9.8, k);
  FieldConfig c;
  c.omega_rf = 100.0;
  c.rf_mode = RfMode::SinglePlus;
  CHECK(rf_counter_beat(c, cal) == cal.delta_omega);
  const Operator h0 = h_rf(c, cal, 0.0);
  CHECK(std::abs(h0(kP, kZ)) == doctest::Approx(50.0).scale(0.0));
  CHECK(std::abs(h0(kM, kZ)) == doctest::Approx(50.0).scale(0.0));
  const double period = kTwoPi / std::abs(cal.delta_omega);
  CHECK((h_rf(c, cal, period) - h0).norm() < 1e-9);
  c.rf_mode = RfMode::SingleMinus;
  c.delta_rf = 7.0;
  CHECK(rf_counter_beat(c, cal) == cal.delta_omega - 7.0);
}

TEST_CASE("hamiltonian: field noise shifts +-1 oppositely") {
  const PhysicalConstants k;
  const Operator h = h_noise(1e-3, k);
  CHECK(h(kP, kP).real() == doctest::Approx(k.s1 * 1e-3).scale(0.0));
  CHECK(h(kM, kM).real() == doctest::Approx(-k.s1 * 1e-3).scale(0.0));
  CHECK(h(kZ, kZ) == Complex(0.0));
  CHECK(h(k0, k0) == Complex(0.0));
}

TEST_CASE("hamiltonian: Zeeman limits") {
  const PhysicalConstants k;
  CHECK(second_order_zeeman(0.0, k) == 0.0);
  const auto [p0, m0] = zeeman_splittings(0.0, k);
  CHECK(p0 == 0.0);
  CHECK(m0 == 0.0);
  CHECK(hertz(second_order_zeeman(1.0, k)) == doctest::Approx(-310.0).epsilon(1e-12).scale(0.0));
  const auto [p, m] = zeeman_splittings(9.80, k);
  CHECK(hertz(p) == doctest::Approx(13.7e6).epsilon(0.005).scale(0.0));
  CHECK(p - m == doctest::Approx(k.c2 * 9.80 * 9.80).epsilon(1e-12).scale(0.0));
}

TEST_CASE("hamiltonian: 16 kHz dressing splits by 11.31 kHz") {
  FieldConfig c;
  c.omega_mw_plus = c.omega_mw_minus = angular(16e3);
  const auto ev = sorted_eigenvalues(h_dressing(c));
  CHECK(hertz(ev[3]) == doctest::Approx(11.31e3).epsilon(1e-3).scale(0.0));
  CHECK(hertz(ev[0]) == doctest::Approx(-11.31e3).epsilon(1e-3).scale(0.0));
  CHECK(h_dressing(FieldConfig{}).norm() == 0.0);
}

TEST_CASE("hamiltonian: unequal dressing fields keep a dark state") {
  FieldConfig c;
  c.omega_mw_plus = 2.0;
  c.omega_mw_minus = 1.0;
  const Operator h = h_dressing(c);
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  Amplitudes v = Amplitudes::Zero();
  v(kP) = 1.0;
  v(kM) = -2.0;
  v.normalize();
  // projection onto the brute-force null space
  Amplitudes proj = Amplitudes::Zero();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(es.eigenvalues()(i)) > 1e-12) continue;
    const Amplitudes e = es.eigenvectors().col(i);
    proj += e * e.dot(v);
  }
  CHECK((proj - v).norm() < 1e-12);
  CHECK((h * v).norm() < 1e-15);
}

TEST_CASE("hamiltonian: dual rf at phi = pi/2 couples only |D> and |0'>") {
  const PhysicalConstants k;
  auto cal = SpeciesCalibration::from_field(9.8, k);
  cal.delta_omega = 0.0;
  const int z = index(DressedLevel::ZeroPrime), dk = index(DressedLevel::Dark), u = index(DressedLevel::Up),
            dd = index(DressedLevel::Down);
  for (int i = 0; i < 64; ++i) {
    const double phi = kTwoPi * i / 64.0;
    FieldConfig c;
    c.omega_rf = 100.0;
    c.phi_rf = phi;
    c.rf_mode = RfMode::DualResonant;
    const Operator hd = to_dressed_frame(h_rf(c, cal, 0.0));
    CHECK(std::abs(hd(u, z)) == doctest::Approx(50.0 * std::abs(std::cos(phi))).epsilon(1e-12).scale(100.0));
    CHECK(std::abs(hd(dd, z)) == doctest::Approx(50.0 * std::abs(std::cos(phi))).epsilon(1e-12).scale(100.0));
  }
  FieldConfig c;
  c.omega_rf = 100.0;
  c.phi_rf = kPi / 2;
  c.rf_mode = RfMode::DualResonant;
  const Operator hd = to_dressed_frame(h_rf(c, cal, 0.0));
  CHECK(std::abs(hd(dk, z)) == doctest::Approx(100.0 / std::sqrt(2.0)).epsilon(1e-12).scale(0.0));
  CHECK(std::abs(hd(u, z)) < 1e-12);
  CHECK(std::abs(hd(dd, z)) < 1e-12);
  CHECK(std::abs(hd(u, dk)) < 1e-12);
  c.omega_rf = 0.0;
  CHECK(h_rf(c, cal, 0.3).norm() == 0.0);
}

TEST_CASE("hamiltonian: single-field rf averaged over the beat") {
  const PhysicalConstants k;
  const auto cal = SpeciesCalibration::from_field(9.8, k);
  FieldConfig c;
  c.omega_rf = 100.0;
  c.rf_mode = RfMode::SinglePlus;
  const double period = kTwoPi / std::abs(cal.delta_omega);
  const int n = 256;
  Operator avg = Operator::Zero();
  for (int i = 0; i < n; ++i) avg += h_rf(c, cal, period * i / n) / static_cast<double>(n);
  const Operator hd = to_dressed_frame(avg);
  const int z = index(DressedLevel::ZeroPrime);
  CHECK(std::abs(hd(index(DressedLevel::Dark), z)) == doctest::Approx(100.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-9).scale(0.0));
  CHECK(std::abs(hd(index(DressedLevel::Up), z)) == doctest::Approx(25.0).epsilon(1e-9).scale(0.0));
  CHECK(std::abs(hd(index(DressedLevel::Down), z)) == doctest::Approx(25.0).epsilon(1e-9).scale(0.0));
}

TEST_CASE("hamiltonian: noise operator") {
  const PhysicalConstants k;
  CHECK(h_noise(0.0, k).norm() == 0.0);
  const Operator h = h_noise(1e-6, k);
  CHECK(hertz(h(kP, kP).real()) == doctest::Approx(1.398).epsilon(1e-3).scale(0.0));
  CHECK(std::abs(h.trace()) < 1e-15);
  const auto cal = SpeciesCalibration::from_field(9.8, k);
  CHECK(h_total(FieldConfig{}, cal, k, 0.0, 1e-3).norm() == 0.0);
}
