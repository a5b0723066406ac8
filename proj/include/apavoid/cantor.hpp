#pragma once

// Two-piece Cantor constructions whose central holes are long enough that no
// (k, eps)-AP can straddle them, together with a per-level certificate and
// discretisations for brute-force cross-checks.

#include <cstdint>
#include <optional>
#include <vector>

#include "apavoid/ap_detect.hpp"
#include "apavoid/errors.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"

namespace apavoid {

/// Contraction ratios c_1, c_2, ... for a given (k, eps).
class RatioSchedule {
 public:
  enum class Kind { constant, increasing };

  /// Every level uses ratio c, 0 < c < 1/2.
  static RatioSchedule constant(long k, const Rational& eps, const Rational& c) {
    if (c <= 0 || c >= Rational(1, 2)) throw domain_error("constant ratio must lie in (0, 1/2)");
    return RatioSchedule(Kind::constant, k, eps, c);
  }

  /// c_m = c_inf * (m + 1) / (m + 2), strictly increasing to c_inf.
  static RatioSchedule increasing(long k, const Rational& eps) {
    RatioSchedule s(Kind::increasing, k, eps, Rational(0));
    if (s.limit() <= 0) throw domain_error("epsilon must be below (k-2)/4");
    return s;
  }

  Kind kind() const { return kind_; }
  long k() const { return k_; }
  const Rational& epsilon() const { return eps_; }
  const Rational& constant_ratio() const { return c_; }

  /// c_inf = (k - 2 - 4 eps) / (2k - 2 - 4 eps).
  Rational limit() const { return (Rational(k_ - 2) - 4 * eps_) / (Rational(2 * k_ - 2) - 4 * eps_); }

  /// Ratio applied when passing from level m - 1 to level m (m >= 1).
  Rational ratio(int m) const {
    if (m < 1) throw domain_error("ratios are indexed from 1");
    if (kind_ == Kind::constant) return c_;
    return limit() * Rational(m + 1, m + 2);
  }

  /// Whether every ratio stays strictly below c_inf.
  bool below_limit() const { return kind_ == Kind::increasing || c_ < limit(); }

 private:
  RatioSchedule(Kind kind, long k, const Rational& eps, const Rational& c) : kind_(kind), k_(k), eps_(eps), c_(c) {
    if (k_ < 3) throw domain_error("k must be at least 3");
    if (eps_ <= 0) throw domain_error("epsilon must be positive");
  }

  Kind kind_;
  long k_;
  Rational eps_;
  Rational c_;
};

struct MoranSet {
  int depth = 0;
  /// levels[m] holds the 2^m intervals of level m, left to right.
  std::vector<std::vector<ClosedInterval>> levels;
  RatioSchedule schedule;

  const std::vector<ClosedInterval>& finest() const { return levels.back(); }
};

/// Level m + 1 replaces each level-m interval I by its two end pieces of length c_{m+1}|I|.
inline MoranSet build_moran_set(int depth, const RatioSchedule& schedule) {
  if (depth < 0) throw domain_error("depth must be non-negative");
  if (depth > 24) throw resource_error("depth above 24 would hold more than 2^24 intervals");
  MoranSet set{depth, {{ClosedInterval(0, 1)}}, schedule};
  for (int m = 1; m <= depth; ++m) {
    const Rational c = schedule.ratio(m);
    std::vector<ClosedInterval> next;
    next.reserve(set.levels.back().size() * 2);
    for (const auto& iv : set.levels.back()) {
      const Rational piece = c * iv.length();
      next.emplace_back(iv.left, iv.left + piece);
      next.emplace_back(iv.right - piece, iv.right);
    }
    set.levels.push_back(std::move(next));
  }
  return set;
}

/// The construction with the hypotheses checked: 0 < eps < min(1, (k-2)/4) and c_m < c_inf.
inline MoranSet build_theorem3_set(long k, const Rational& eps, int depth, const RatioSchedule& schedule) {
  if (k < 3) throw domain_error("k must be at least 3");
  if (eps <= 0 || eps >= 1) throw domain_error("epsilon must lie in (0, 1)");
  if (eps >= Rational(k - 2, 4)) throw domain_error("epsilon must be below (k-2)/4");
  if (schedule.k() != k || schedule.epsilon() != eps) throw domain_error("schedule was made for different (k, eps)");
  if (!schedule.below_limit()) throw domain_error("schedule ratio must stay below (k-2-4eps)/(2k-2-4eps)");
  return build_moran_set(depth, schedule);
}

struct HoleCheck {
  int level = 0;  // parent level m; the hole opens when building level m + 1
  Rational hole_fraction;
  Rational threshold;
  bool pass = false;
};

struct AvoidanceCertificate {
  long k = 0;
  Rational epsilon;
  std::vector<HoleCheck> levels;

  bool valid() const {
    for (const auto& h : levels)
      if (!h.pass) return false;
    return true;
  }
};

/// Checks, from the interval geometry, that every hole is longer than
/// |I| (1 + 2 eps) / (k - 1 - 2 eps). Any (k, eps)-AP inside I minus the hole then
/// sits in one child, and by induction the limit set holds none.
inline AvoidanceCertificate lemma1_certify(const MoranSet& set) {
  const long k = set.schedule.k();
  const Rational& eps = set.schedule.epsilon();
  AvoidanceCertificate cert{k, eps, {}};
  const Rational room = Rational(k - 1) - 2 * eps;
  const bool meaningful = room > 0;
  const Rational threshold = meaningful ? (1 + 2 * eps) / room : Rational(1);
  for (int m = 0; m < set.depth; ++m) {
    const auto& parents = set.levels[static_cast<std::size_t>(m)];
    const auto& children = set.levels[static_cast<std::size_t>(m) + 1];
    std::optional<Rational> smallest;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const ClosedInterval hole(children[2 * i].right, children[2 * i + 1].left);
      const Rational f = interval_gap_fraction(parents[i], hole);
      if (!smallest || f < *smallest) smallest = f;
    }
    cert.levels.push_back({m, *smallest, threshold, meaningful && *smallest > threshold});
  }
  return cert;
}

enum class DiscretizeMode { endpoints, midpoints, grid };

/// Finite sample of the finest level. `grid` places `per_interval` equally spaced
/// points (endpoints included) in every interval.
inline PointSet1D discretize(const MoranSet& set, DiscretizeMode mode = DiscretizeMode::endpoints,
                             int per_interval = 2) {
  std::vector<Rational> pts;
  for (const auto& iv : set.finest()) {
    switch (mode) {
      case DiscretizeMode::endpoints:
        pts.push_back(iv.left);
        pts.push_back(iv.right);
        break;
      case DiscretizeMode::midpoints:
        pts.push_back((iv.left + iv.right) / 2);
        break;
      case DiscretizeMode::grid:
        if (per_interval < 1) throw domain_error("grid needs at least one point per interval");
        if (per_interval == 1) {
          pts.push_back((iv.left + iv.right) / 2);
          break;
        }
        for (int j = 0; j < per_interval; ++j) pts.push_back(iv.left + iv.length() * Rational(j, per_interval - 1));
        break;
    }
  }
  return PointSet1D(std::move(pts));
}

struct AvoidanceVerdict {
  bool pass = true;
  std::optional<std::vector<Rational>> counterexample;
  std::optional<APWitness> witness;
  std::uint64_t nodes = 0;
};

/// Exhaustive (k, eps)-AP search over the sample.
inline AvoidanceVerdict verify_avoidance(const PointSet1D& points, int k, const Rational& eps,
                                         APSearchOptions options = {}) {
  const auto res = search_almost_ap(points, k, eps, options);
  AvoidanceVerdict v;
  v.nodes = res.nodes;
  if (res.match) {
    v.pass = false;
    std::vector<Rational> tuple;
    for (auto i : res.match->indices) tuple.push_back(points[i]);
    v.counterexample = std::move(tuple);
    v.witness = res.match->witness;
  }
  return v;
}

}  // namespace apavoid
