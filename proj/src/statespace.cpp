#include "dsq/statespace.hpp"

#include "dsq/errors.hpp"

#include <cmath>

namespace dsq {

std::string_view level_name(BareLevel l) {
  switch (l) {
    case BareLevel::Zero: return "0";
    case BareLevel::Minus: return "-1";
    case BareLevel::ZeroPrime: return "0'";
    case BareLevel::Plus: return "+1";
  }
  return "?";
}

std::string_view level_name(DressedLevel l) {
  switch (l) {
    case DressedLevel::ZeroPrime: return "0'";
    case DressedLevel::Dark: return "D";
    case DressedLevel::Up: return "u";
    case DressedLevel::Down: return "d";
  }
  return "?";
}

StateVector StateVector::bare(BareLevel level) {
  Amplitudes a = Amplitudes::Zero();
  a(index(level)) = 1.0;
  return {a, Basis::Bare};
}

StateVector StateVector::dressed(DressedLevel level) {
  Amplitudes a = Amplitudes::Zero();
  a(index(level)) = 1.0;
  return {a, Basis::Dressed};
}

std::array<double, 4> StateVector::populations() const {
  return {std::norm(amps_(0)), std::norm(amps_(1)), std::norm(amps_(2)), std::norm(amps_(3))};
}

std::array<double, 8> StateVector::serialize() const {
  std::array<double, 8> out{};
  for (int i = 0; i < 4; ++i) {
    out[2 * i] = amps_(i).real();
    out[2 * i + 1] = amps_(i).imag();
  }
  return out;
}

StateVector StateVector::deserialize(const std::array<double, 8>& data, Basis basis) {
  Amplitudes a;
  for (int i = 0; i < 4; ++i) a(i) = Complex(data[2 * i], data[2 * i + 1]);
  return {a, basis};
}

const Operator& dressed_transform() {
  static const Operator u = [] {
    const double h = 0.5;
    const double r = 1.0 / std::sqrt(2.0);
    Operator m = Operator::Zero();
    // columns: |0>, |-1>, |0'>, |+1>
    m.row(index(DressedLevel::ZeroPrime)) << 0, 0, 1, 0;
    m.row(index(DressedLevel::Dark)) << 0, -r, 0, r;
    m.row(index(DressedLevel::Up)) << r, h, 0, h;
    m.row(index(DressedLevel::Down)) << -r, h, 0, h;
    return m;
  }();
  return u;
}

StateVector to_dressed(const StateVector& state) {
  if (state.basis() != Basis::Bare) throw BasisError("to_dressed: state is already in the dressed basis");
  return {dressed_transform() * state.amplitudes(), Basis::Dressed};
}

StateVector to_bare(const StateVector& state) {
  if (state.basis() != Basis::Dressed) throw BasisError("to_bare: state is already in the bare basis");
  return {dressed_transform().adjoint() * state.amplitudes(), Basis::Bare};
}

Operator to_dressed_frame(const Operator& bare_op) {
  const Operator& u = dressed_transform();
  return u * bare_op * u.adjoint();
}

Operator projector(int row, int col) {
  Operator m = Operator::Zero();
  m(row, col) = 1.0;
  return m;
}

bool is_hermitian(const Operator& op, double rel_tol) {
  const double scale = op.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (op - op.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace dsq
