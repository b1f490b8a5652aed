#include "dsq/units.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace dsq {
namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dim;
  double multiplier;  // applied when >= 1
  double divisor;     // applied when > 1
};

constexpr std::array<UnitEntry, 13> kUnits{{
    {"s", Dimension::Time, 1.0, 1.0},
    {"ms", Dimension::Time, 1.0, 1e3},
    {"us", Dimension::Time, 1.0, 1e6},
    {"ns", Dimension::Time, 1.0, 1e9},
    {"Hz", Dimension::Frequency, 1.0, 1.0},
    {"kHz", Dimension::Frequency, 1e3, 1.0},
    {"MHz", Dimension::Frequency, 1e6, 1.0},
    {"rad", Dimension::Angle, 1.0, 1.0},
    {"deg", Dimension::Angle, 1.0, 1.0},
    {"G", Dimension::Field, 1.0, 1.0},
    {"mG", Dimension::Field, 1.0, 1e3},
    {"uG", Dimension::Field, 1.0, 1e6},
    {"GHz", Dimension::Frequency, 1e9, 1.0},
}};

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Time: return "time";
    case Dimension::Frequency: return "frequency";
    case Dimension::Angle: return "angle";
    case Dimension::Field: return "magnetic field";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "?";
}

QuantityParse parse_quantity(std::string_view text) {
  QuantityParse out;
  if (text.empty()) {
    out.error = "expected a number";
    return out;
  }
  double number = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  // from_chars rejects a leading '+'
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, number);
  if (ec != std::errc{} || ptr == begin) {
    out.error = "expected a number";
    out.error_offset = 0;
    return out;
  }
  const std::size_t unit_offset = static_cast<std::size_t>(ptr - text.data());
  const std::string_view unit = text.substr(unit_offset);
  if (unit.empty()) {
    out.quantity = Quantity{number, Dimension::Dimensionless};
    return out;
  }
  for (const auto& u : kUnits) {
    if (u.symbol != unit) continue;
    double v = number;
    if (u.symbol == "deg") {
      v = number * kPi / 180.0;
    } else {
      if (u.multiplier != 1.0) v *= u.multiplier;
      if (u.divisor != 1.0) v /= u.divisor;
    }
    out.quantity = Quantity{v, u.dim};
    return out;
  }
  out.error = "malformed unit '" + std::string(unit) + "'";
  out.error_offset = unit_offset;
  return out;
}

QuantityParse parse_quantity(std::string_view text, Dimension expected) {
  QuantityParse out = parse_quantity(text);
  if (!out.quantity) return out;
  if (out.quantity->dim != expected) {
    std::string msg = "expected a " + std::string(dimension_name(expected)) + " value";
    if (out.quantity->dim == Dimension::Dimensionless) {
      msg += " with a unit";
    } else {
      msg += ", got " + std::string(dimension_name(out.quantity->dim));
    }
    out.quantity.reset();
    out.error = msg;
    out.error_offset = 0;
  }
  return out;
}

std::string format_exact(double value) {
  char buf[40];
  // shortest representation that reads back to the same double
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
  }
  return std::string(buf, ptr);
}

std::string format_quantity(double value, Dimension dim) {
  std::string s = format_exact(value);
  switch (dim) {
    case Dimension::Time: return s + "s";
    case Dimension::Frequency: return s + "Hz";
    case Dimension::Angle: return s + "rad";
    case Dimension::Field: return s + "G";
    case Dimension::Dimensionless: return s;
  }
  return s;
}

}  // namespace dsq
