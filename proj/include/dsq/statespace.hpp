#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string_view>

namespace dsq {

using Complex = std::complex<double>;
using Operator = Eigen::Matrix<Complex, 4, 4>;
using Amplitudes = Eigen::Matrix<Complex, 4, 1>;

/// Ground-state hyperfine levels in canonical index order.
enum class BareLevel : int { Zero = 0, Minus = 1, ZeroPrime = 2, Plus = 3 };

/// Microwave-dressed basis. |0'> is shared with the bare basis.
enum class DressedLevel : int { ZeroPrime = 0, Dark = 1, Up = 2, Down = 3 };

enum class Basis { Bare, Dressed };

constexpr int index(BareLevel l) { return static_cast<int>(l); }
constexpr int index(DressedLevel l) { return static_cast<int>(l); }

std::string_view level_name(BareLevel l);
std::string_view level_name(DressedLevel l);

class StateVector {
 public:
  StateVector() = default;
  StateVector(const Amplitudes& amps, Basis basis) : amps_(amps), basis_(basis) {}

  static StateVector bare(BareLevel level);
  static StateVector dressed(DressedLevel level);

  const Amplitudes& amplitudes() const { return amps_; }
  Amplitudes& amplitudes() { return amps_; }
  Basis basis() const { return basis_; }

  Complex operator[](int i) const { return amps_(i); }
  double norm() const { return amps_.norm(); }
  std::array<double, 4> populations() const;

  /// Interleaved (re, im) pairs in canonical order.
  std::array<double, 8> serialize() const;
  static StateVector deserialize(const std::array<double, 8>& data, Basis basis);

 private:
  Amplitudes amps_ = Amplitudes::Zero();
  Basis basis_ = Basis::Bare;
};

/// Unitary whose rows are <0'|, <D|, <u|, <d| written in the bare basis.
/// Signs follow |D> = (|+1> - |-1>)/sqrt2, |u>,|d> = (|+1> + |-1>)/2 +- |0>/sqrt2.
const Operator& dressed_transform();

StateVector to_dressed(const StateVector& state);
StateVector to_bare(const StateVector& state);

/// Bare-basis operator rewritten in the dressed basis: U * op * U^dagger.
Operator to_dressed_frame(const Operator& bare_op);

/// |row><col| in a 4-dim space.
Operator projector(int row, int col);

bool is_hermitian(const Operator& op, double rel_tol = 1e-12);

}  // namespace dsq
