#pragma once

// Covering numbers, box-dimension slopes and a finite-scale Assouad probe.

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "apavoid/bounds.hpp"
#include "apavoid/cantor.hpp"
#include "apavoid/errors.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"
#include "apavoid/real.hpp"

namespace apavoid {

namespace detail {

inline void require_mesh(const Rational& r) {
  if (r <= 0) throw domain_error("mesh r must be positive");
}

inline double log_of(const Rational& x) { return static_cast<double>(log(to_real(x))); }

/// Exact n-th root of a positive rational, when it exists.
inline std::optional<Rational> exact_root(const Rational& x, unsigned n) {
  BigInt p, q;
  const BigInt num = numerator(x), den = denominator(x);
  if (mpz_root(p.backend().data(), num.backend().data(), n) == 0) return std::nullopt;
  if (mpz_root(q.backend().data(), den.backend().data(), n) == 0) return std::nullopt;
  return Rational(p, q);
}

}  // namespace detail

/// Fewest closed intervals of length r covering the union (the optimal cover on
/// the line is found by sweeping left to right). Input need not be sorted.
inline std::uint64_t box_count(std::span<const ClosedInterval> intervals, const Rational& r) {
  detail::require_mesh(r);
  if (intervals.empty()) throw domain_error("cannot count an empty set");
  std::vector<ClosedInterval> sorted(intervals.begin(), intervals.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.left < b.left; });
  std::uint64_t count = 0;
  std::optional<Rational> covered;  // right end of the cover built so far
  for (const auto& iv : sorted) {
    if (covered && iv.right <= *covered) continue;
    const Rational start = covered && iv.left <= *covered ? *covered : iv.left;
    const bool fresh = !covered || iv.left > *covered;
    // A fresh piece needs one interval even when it is a single point.
    BigInt pieces = ceil_div((iv.right - start) / r);
    if (fresh && pieces == 0) pieces = 1;
    count += pieces.convert_to<std::uint64_t>();
    covered = start + Rational(pieces) * r;
  }
  return count;
}

inline std::uint64_t box_count(const PointSet1D& points, const Rational& r) {
  std::vector<ClosedInterval> ivs;
  ivs.reserve(points.size());
  for (const auto& p : points) ivs.emplace_back(p, p);
  return box_count(ivs, r);
}

/// The finest level stands in for the limit set; counts saturate below its interval length.
inline std::uint64_t box_count(const MoranSet& set, const Rational& r) { return box_count(set.finest(), r); }

/// Occupied cells of the half-open grid of side r anchored at the origin. In R^d
/// this brackets the optimal cover by diameter-r sets within a factor depending only on d.
inline std::uint64_t box_count(const PointSetD& points, const Rational& r) {
  detail::require_mesh(r);
  if (points.empty()) throw domain_error("cannot count an empty set");
  std::set<std::vector<BigInt>> cells;
  for (const auto& p : points.points()) {
    std::vector<BigInt> cell;
    cell.reserve(p.size());
    for (const auto& c : p) cell.push_back(floor_div(c / r));
    cells.insert(std::move(cell));
  }
  return cells.size();
}

struct ScalingSample {
  Rational r;
  std::uint64_t count = 0;
  double log_inv_r = 0;
  double log_count = 0;
};

struct ScalingDiagnostics {
  std::vector<ScalingSample> samples;
  double slope = 0;
  double intercept = 0;
  double residual_norm = 0;
  Rational r_min, r_max;
  bool exact_scales = false;  // whether r_max / r_min had an exact rational root
};

/// Geometric scales r_max = r_0 > ... > r_{n-1} = r_min. Exact when the ratio has a
/// rational (n-1)-th root, otherwise rounded to 60-digit binary floats.
inline std::vector<Rational> geometric_scales(const Rational& r_min, const Rational& r_max, int count,
                                              bool* exact = nullptr) {
  if (count < 3) throw domain_error("need at least 3 scales");
  if (r_min <= 0 || r_min >= r_max) throw domain_error("need 0 < r_min < r_max");
  const auto root = detail::exact_root(r_max / r_min, static_cast<unsigned>(count - 1));
  if (exact) *exact = root.has_value();
  std::vector<Rational> scales{r_max};
  if (root) {
    for (int i = 1; i < count; ++i) scales.push_back(scales.back() / *root);
  } else {
    const Real step = pow(to_real(r_min / r_max), Real(1) / (count - 1));
    for (int i = 1; i < count - 1; ++i) scales.push_back(to_rational(to_real(r_max) * pow(step, i)));
    scales.push_back(r_min);
  }
  return scales;
}

/// Least-squares slope of log N(r) against log(1/r).
template <class Set>
ScalingDiagnostics box_dimension_estimate(const Set& set, const Rational& r_min, const Rational& r_max,
                                          int scale_count) {
  ScalingDiagnostics out;
  out.r_min = r_min;
  out.r_max = r_max;
  for (const auto& r : geometric_scales(r_min, r_max, scale_count, &out.exact_scales)) {
    const std::uint64_t n = box_count(set, r);
    out.samples.push_back({r, n, -detail::log_of(r), std::log(static_cast<double>(n))});
  }
  double mx = 0, my = 0;
  for (const auto& s : out.samples) {
    mx += s.log_inv_r;
    my += s.log_count;
  }
  mx /= static_cast<double>(out.samples.size());
  my /= static_cast<double>(out.samples.size());
  double sxx = 0, sxy = 0;
  for (const auto& s : out.samples) {
    sxx += (s.log_inv_r - mx) * (s.log_inv_r - mx);
    sxy += (s.log_inv_r - mx) * (s.log_count - my);
  }
  if (!(sxx > 0)) throw domain_error("scales are numerically indistinguishable");
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double rss = 0;
  for (const auto& s : out.samples) {
    const double e = s.log_count - (out.intercept + out.slope * s.log_inv_r);
    rss += e * e;
  }
  out.residual_norm = std::sqrt(rss);
  return out;
}

/// One probe: N(B(x, R) intersect F, r) against R / r.
struct AssouadSample {
  Rational x;
  Rational big_r;
  Rational small_r;
};

/// Random probes centred at points of the set, with (R, r) drawn from the given lists.
struct AssouadPlan {
  std::uint64_t seed = 0;
  int samples = 32;
  std::vector<Rational> radii;
  std::vector<Rational> meshes;
};

struct AssouadSampleD {
  PointD x;
  Rational big_r;
  Rational small_r;
};

struct AssouadProbeResult {
  PointD x;
  Rational big_r;
  Rational small_r;
  std::uint64_t count = 0;
  double exponent = 0;
};

/// Finite-scale indication only: a finite sample has Assouad dimension 0 and no
/// extrapolation is attempted. Exponents compare against the ball diameter,
/// log N / log(2R / r), so a full interval scores exactly 1 at every scale.
struct AssouadReport {
  std::vector<AssouadProbeResult> probes;
  std::optional<double> max_exponent;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<ClosedInterval> clip_to_ball(std::span<const ClosedInterval> set, const Rational& x,
                                                const Rational& big_r) {
  const Rational lo = x - big_r, hi = x + big_r;
  std::vector<ClosedInterval> out;
  for (const auto& iv : set) {
    if (iv.right < lo || iv.left > hi) continue;
    out.emplace_back(std::max(iv.left, lo), std::min(iv.right, hi));
  }
  return out;
}

inline std::vector<ClosedInterval> as_intervals(const PointSet1D& points) {
  std::vector<ClosedInterval> ivs;
  for (const auto& p : points) ivs.emplace_back(p, p);
  return ivs;
}

inline std::vector<ClosedInterval> as_intervals(const MoranSet& set) { return set.finest(); }

inline std::vector<ClosedInterval> as_intervals(std::span<const ClosedInterval> set) {
  return {set.begin(), set.end()};
}

inline std::vector<AssouadSample> plan_samples(std::span<const ClosedInterval> set, const AssouadPlan& plan) {
  if (plan.radii.empty() || plan.meshes.empty()) throw domain_error("sampling plan needs radii and meshes");
  if (plan.samples < 0) throw domain_error("sample count must be non-negative");
  std::mt19937_64 rng(plan.seed);
  std::vector<AssouadSample> out;
  for (int i = 0; i < plan.samples; ++i) {
    const auto& iv = set[rng() % set.size()];
    const Rational x = rng() % 2 == 0 ? iv.left : iv.right;
    const auto& big_r = plan.radii[rng() % plan.radii.size()];
    const auto& small_r = plan.meshes[rng() % plan.meshes.size()];
    out.push_back({x, big_r, small_r});
  }
  return out;
}

}  // namespace detail

/// Maximum over samples of log N(B(x, R) intersect F, r) / log(2R / r).
template <class Set>
AssouadReport assouad_probe(const Set& set, std::span<const AssouadSample> samples) {
  const auto intervals = detail::as_intervals(set);
  if (intervals.empty()) throw domain_error("cannot probe an empty set");
  AssouadReport report;
  for (const auto& s : samples) {
    if (s.small_r <= 0 || s.big_r <= 0) {
      report.warnings.push_back("skipped sample with non-positive radius");
      continue;
    }
    if (s.small_r >= s.big_r) {
      report.warnings.push_back("skipped sample with r >= R at x = " + to_string(s.x));
      continue;
    }
    const auto local = detail::clip_to_ball(intervals, s.x, s.big_r);
    if (local.empty()) {
      report.warnings.push_back("skipped sample whose ball misses the set at x = " + to_string(s.x));
      continue;
    }
    const std::uint64_t n = box_count(local, s.small_r);
    const double e = std::log(static_cast<double>(n)) / detail::log_of(2 * s.big_r / s.small_r);
    report.probes.push_back({{s.x}, s.big_r, s.small_r, n, e});
    if (!report.max_exponent || e > *report.max_exponent) report.max_exponent = e;
  }
  return report;
}

template <class Set>
AssouadReport assouad_probe(const Set& set, const AssouadPlan& plan) {
  const auto intervals = detail::as_intervals(set);
  if (intervals.empty()) throw domain_error("cannot probe an empty set");
  const auto samples = detail::plan_samples(intervals, plan);
  return assouad_probe(set, std::span<const AssouadSample>(samples));
}

/// Euclidean balls in R^d, counted on the anchored grid of side r.
inline AssouadReport assouad_probe(const PointSetD& set, std::span<const AssouadSampleD> samples) {
  if (set.empty()) throw domain_error("cannot probe an empty set");
  AssouadReport report;
  for (const auto& s : samples) {
    if (s.x.size() != set.dimension()) throw domain_error("sample centre has the wrong dimension");
    if (s.small_r <= 0 || s.big_r <= 0 || s.small_r >= s.big_r) {
      report.warnings.push_back("skipped sample with r >= R or non-positive radius");
      continue;
    }
    std::vector<PointD> inside;
    for (const auto& p : set.points()) {
      Rational d2 = 0;
      for (std::size_t c = 0; c < p.size(); ++c) d2 += (p[c] - s.x[c]) * (p[c] - s.x[c]);
      if (d2 <= s.big_r * s.big_r) inside.push_back(p);
    }
    if (inside.empty()) {
      report.warnings.push_back("skipped sample whose ball misses the set");
      continue;
    }
    const std::uint64_t n = box_count(PointSetD(set.dimension(), std::move(inside)), s.small_r);
    const double e = std::log(static_cast<double>(n)) / detail::log_of(2 * s.big_r / s.small_r);
    report.probes.push_back({s.x, s.big_r, s.small_r, n, e});
    if (!report.max_exponent || e > *report.max_exponent) report.max_exponent = e;
  }
  return report;
}

/// Balls equal to level-a intervals I_a (centre at the midpoint, R = |I_a| / 2)
/// probed at mesh r = |I_b|, for levels a < b <= depth.
inline std::vector<AssouadSample> aligned_samples(const MoranSet& set, int max_centres_per_level = 8) {
  std::vector<AssouadSample> out;
  for (int a = 0; a < set.depth; ++a) {
    const auto& level = set.levels[static_cast<std::size_t>(a)];
    const std::size_t stride = std::max<std::size_t>(1, level.size() / static_cast<std::size_t>(max_centres_per_level));
    for (std::size_t i = 0; i < level.size(); i += stride)
      for (int b = a + 1; b <= set.depth; ++b)
        out.push_back({(level[i].left + level[i].right) / 2, level[i].length() / 2, set.levels[static_cast<std::size_t>(b)].front().length()});
  }
  return out;
}

}  // namespace apavoid
