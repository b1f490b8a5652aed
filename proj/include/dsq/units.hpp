#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace dsq {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Ordinary frequency (Hz) to angular frequency (rad/s).
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

enum class Dimension { Time, Frequency, Angle, Field, Dimensionless };

std::string_view dimension_name(Dimension d);

/// A number with its unit resolved to the base unit of its dimension:
/// seconds, Hz (ordinary frequency), radians, gauss.
struct Quantity {
  double value = 0.0;
  Dimension dim = Dimension::Dimensionless;
};

/// Result of lexing "<number><unit>". `error` is set on failure and names the
/// problem; `error_offset` points at the offending character.
struct QuantityParse {
  std::optional<Quantity> quantity;
  std::string error;
  std::size_t error_offset = 0;
};

/// Units: s ms us ns | Hz kHz MHz | deg rad | G mG uG. Sub-units are applied by
/// division so integer inputs convert with a single rounding.
QuantityParse parse_quantity(std::string_view text);

/// Same as parse_quantity but also checks the dimension. A bare number is
/// accepted only for Dimensionless.
QuantityParse parse_quantity(std::string_view text, Dimension expected);

/// Shortest text that parses back to exactly `value` in the base unit.
std::string format_quantity(double value, Dimension dim);

/// Shortest decimal text that round-trips the double.
std::string format_exact(double value);

}  // namespace dsq
