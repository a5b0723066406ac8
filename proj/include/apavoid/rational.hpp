#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cmath>
#include <string>
#include <string_view>

#include "apavoid/errors.hpp"

namespace apavoid {

/// Arbitrary-precision fraction, always in lowest terms with positive denominator.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// GMP reads a leading 0 as an octal prefix, so strip it first.
inline BigInt from_digits(std::string_view digits) {
  const auto nz = digits.find_first_not_of('0');
  if (nz == std::string_view::npos) return BigInt(0);
  return BigInt(std::string(digits.substr(nz)));
}

inline BigInt parse_integer(std::string_view s, std::string_view whole) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw parse_error("malformed rational '" + std::string(whole) + "'");
  const BigInt v = from_digits(s);
  return negative ? BigInt(-v) : v;
}

inline BigInt pow10(long n) {
  BigInt p = 1;
  for (long i = 0; i < n; ++i) p *= 10;
  return p;
}

}  // namespace detail

/// Parses "p/q" or a finite decimal (optionally with exponent). Decimals convert exactly.
inline Rational parse_rational(std::string_view text) {
  const std::string_view s = detail::trim(text);
  if (s.empty()) throw parse_error("empty rational");

  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const BigInt p = detail::parse_integer(detail::trim(s.substr(0, slash)), s);
    const BigInt q = detail::parse_integer(detail::trim(s.substr(slash + 1)), s);
    if (q == 0) throw domain_error("zero denominator in '" + std::string(s) + "'");
    return Rational(p, q);
  }

  std::string_view mantissa = s;
  long exponent = 0;
  if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    const std::string_view exp_text = s.substr(e + 1);
    const BigInt ex = detail::parse_integer(exp_text, s);
    if (abs(ex) > 100000) throw domain_error("exponent out of range in '" + std::string(s) + "'");
    exponent = ex.convert_to<long>();
  }

  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long frac_len = 0;
  if (const auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    const std::string_view ip = mantissa.substr(0, dot);
    const std::string_view fp = mantissa.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || (!ip.empty() && !detail::all_digits(ip)) ||
        (!fp.empty() && !detail::all_digits(fp)))
      throw parse_error("malformed rational '" + std::string(s) + "'");
    digits = std::string(ip) + std::string(fp);
    frac_len = static_cast<long>(fp.size());
  } else {
    if (!detail::all_digits(mantissa)) throw parse_error("malformed rational '" + std::string(s) + "'");
    digits = std::string(mantissa);
  }

  BigInt num = detail::from_digits(digits);
  if (negative) num = -num;
  const long scale = exponent - frac_len;
  if (scale >= 0) return Rational(BigInt(num * detail::pow10(scale)));
  return Rational(num, detail::pow10(-scale));
}

/// Canonical "p/q" form; integers keep the "/1".
inline std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Short form for human output: "3" for integers, "p/q" otherwise.
inline std::string to_display(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return to_string(r);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Exact value of a finite double.
inline Rational from_double(double x) {
  if (!std::isfinite(x)) throw domain_error("non-finite value");
  return Rational(x);
}

inline BigInt floor_div(const Rational& r) {
  BigInt q = numerator(r) / denominator(r);  // truncates toward zero
  if (numerator(r) < 0 && q * denominator(r) != numerator(r)) q -= 1;
  return q;
}

inline BigInt ceil_div(const Rational& r) { return -floor_div(-r); }

/// Smallest integer n >= 0 with n*n >= x, for x >= 0; exact.
inline BigInt ceil_sqrt(const Rational& x) {
  if (x < 0) throw domain_error("ceil_sqrt of negative value");
  const BigInt f = floor_div(x);
  BigInt n = sqrt(f);  // floor(sqrt(floor(x)))
  while (Rational(BigInt(n * n)) < x) ++n;
  return n;
}

struct ClosedInterval {
  Rational left;
  Rational right;

  ClosedInterval() = default;
  ClosedInterval(Rational l, Rational r) : left(std::move(l)), right(std::move(r)) {
    if (right < left) throw domain_error("interval with right < left");
  }

  Rational length() const { return right - left; }
  bool contains(const Rational& x) const { return left <= x && x <= right; }
  bool contains(const ClosedInterval& j) const { return left <= j.left && j.right <= right; }

  friend bool operator==(const ClosedInterval&, const ClosedInterval&) = default;
};

/// |J| / |I| for J inside I.
inline Rational interval_gap_fraction(const ClosedInterval& outer, const ClosedInterval& inner) {
  if (outer.length() == 0) throw domain_error("degenerate outer interval");
  if (!outer.contains(inner)) throw domain_error("inner interval is not contained in outer interval");
  return inner.length() / outer.length();
}

}  // namespace apavoid
