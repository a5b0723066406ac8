#pragma once

// Closed-form dimension bounds for sets avoiding almost arithmetic progressions.

#include <optional>
#include <string>

#include "apavoid/errors.hpp"
#include "apavoid/rational.hpp"
#include "apavoid/real.hpp"

namespace apavoid {

enum class BoundFormula { thm1, thm3, thm4, moran };

inline std::string to_string(BoundFormula f) {
  switch (f) {
    case BoundFormula::thm1: return "thm1";
    case BoundFormula::thm3: return "thm3";
    case BoundFormula::thm4: return "thm4";
    case BoundFormula::moran: return "moran";
  }
  return "unknown";
}

struct BoundValue {
  Real value;
  BoundFormula formula = BoundFormula::thm1;
  // Echoed inputs; unused ones stay empty.
  std::optional<long> k, d, m;
  std::optional<Rational> epsilon, ratio;
};

/// ceil(1 / (2 eps)), exactly.
inline BigInt half_inverse_ceiling(const Rational& eps) { return ceil_div(1 / (2 * eps)); }

/// Largest eps' <= eps for which 1/(2 eps') is an integer.
inline Rational rounded_epsilon(const Rational& eps) { return Rational(1) / (2 * Rational(half_inverse_ceiling(eps))); }

/// ceil(sqrt(d) / (2 eps)), exactly: the least n with n^2 >= d / (4 eps^2).
inline BigInt cube_ceiling(long d, const Rational& eps) { return ceil_sqrt(Rational(d) / (4 * eps * eps)); }

/// Upper bound on the dimension of a set in R avoiding (k, eps)-APs:
///   1 + log(1 - 1/k) / log(k * ceil(1/(2 eps))).
inline BoundValue thm1_upper_bound(long k, const Rational& eps) {
  if (k < 3) throw domain_error("k must be at least 3");
  if (eps <= 0 || eps >= 1) throw domain_error("epsilon must lie in (0, 1)");
  const BigInt q = half_inverse_ceiling(eps);
  const Real value = 1 + log(to_real(Rational(k - 1, k))) / log(Real(k) * Real(q));
  return {value, BoundFormula::thm1, k, std::nullopt, std::nullopt, eps, std::nullopt};
}

/// Dimension of the hole-splitting construction:
///   log 2 / log((2k - 2 - 4 eps) / (k - 2 - 4 eps)),  for eps < (k - 2)/4.
inline BoundValue thm3_lower_bound(long k, const Rational& eps) {
  if (k < 3) throw domain_error("k must be at least 3");
  if (eps <= 0 || eps >= 1) throw domain_error("epsilon must lie in (0, 1)");
  if (eps >= Rational(k - 2, 4)) throw domain_error("epsilon must be below (k-2)/4");
  const Rational ratio = (Rational(2 * k - 2) - 4 * eps) / (Rational(k - 2) - 4 * eps);
  const Real value = log(Real(2)) / log(to_real(ratio));
  return {value, BoundFormula::thm3, k, std::nullopt, std::nullopt, eps, ratio};
}

/// Upper bound in R^d when (k, eps, e)-patches of an m-dimensional orientation are absent:
///   d + log(1 - 1/k^m) / log(k * ceil(sqrt(d)/(2 eps))).
/// `quotient_reading` evaluates log(k / ceil(...)) in the denominator instead.
inline BoundValue thm4_upper_bound(long d, long m, long k, const Rational& eps, bool quotient_reading = false) {
  if (d < 1 || m < 1 || m > d) throw domain_error("need 1 <= m <= d");
  if (k < 2) throw domain_error("k must be at least 2");
  if (eps <= 0 || eps * eps * d >= 1) throw domain_error("epsilon must lie in (0, 1/sqrt(d))");
  const BigInt q = cube_ceiling(d, eps);
  Real km = 1;
  for (long i = 0; i < m; ++i) km *= k;
  const Real numerator = log(1 - 1 / km);
  Real denominator;
  if (quotient_reading) {
    if (Rational(k) == Rational(q)) throw domain_error("quotient reading has a zero denominator for these inputs");
    denominator = log(Real(k) / Real(q));
  } else {
    denominator = log(Real(k) * Real(q));
  }
  return {d + numerator / denominator, BoundFormula::thm4, k, d, m, eps, std::nullopt};
}

/// Similarity dimension log 2 / log(1/c) of the two-piece constant-ratio construction.
inline BoundValue moran_dimension(const Rational& c) {
  if (c <= 0 || c >= Rational(1, 2)) throw domain_error("ratio must lie in (0, 1/2)");
  return {log(Real(2)) / log(to_real(1 / c)), BoundFormula::moran, std::nullopt, std::nullopt, std::nullopt,
          std::nullopt, c};
}

}  // namespace apavoid
