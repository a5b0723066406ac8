#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <optional>
#include <sstream>
#include <string>

#include "apavoid/rational.hpp"

namespace apavoid {

/// 60 significant decimal digits; MPFR rounds every elementary operation correctly.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<60>>;

inline Real to_real(const Rational& r) {
  return Real(numerator(r)) / Real(denominator(r));
}

/// Exact rational value of a Real (it is a binary float).
inline Rational to_rational(const Real& x) { return Rational(x.convert_to<Rational>()); }

/// Absolute error allowed for formula values built from a handful of correctly
/// rounded operations on O(1)..O(1e6) magnitudes.
inline const Real& formula_slack() {
  static const Real slack("1e-50");
  return slack;
}

/// true/false when the order of a and b is certain at formula_slack(); nullopt otherwise.
inline std::optional<bool> certified_less(const Real& a, const Real& b) {
  const Real gap = b - a;
  if (gap > formula_slack()) return true;
  if (gap < -formula_slack()) return false;
  return std::nullopt;
}

inline std::string format_real(const Real& x, int digits = 12) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

inline std::string format_real(double x, int digits = 12) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

}  // namespace apavoid
