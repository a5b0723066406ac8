#pragma once

// Exact detection of almost arithmetic progressions on the line.
//
// A tuple b_0 < ... < b_{k-1} is a (k, eps)-AP when some progression
// a_i = a0 + i*gap (gap > 0) satisfies |a_i - b_i| <= eps * gap for every i.
// Dividing by the gap turns this into a two-parameter linear Chebyshev fit
// (u = a0/gap, w = 1/gap):  minimise max_i |i + u - w*b_i|.  The optimum is
// attained on an alternating reference of three indices, so the exact answer
// comes from enumerating index triples.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "apavoid/errors.hpp"
#include "apavoid/feasible_polygon.hpp"
#include "apavoid/parallel.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"

namespace apavoid {

struct APWitness {
  Rational a0;
  Rational gap;
  int k = 0;

  Rational term(int i) const { return a0 + Rational(i) * gap; }

  friend bool operator==(const APWitness&, const APWitness&) = default;
};

struct DistortionResult {
  Rational epsilon_star;
  APWitness witness;
};

struct AlmostAPCheck {
  bool holds = false;
  std::optional<APWitness> witness;
};

/// Index tuple (into the searched set) together with its optimal progression.
struct APMatch {
  std::vector<std::size_t> indices;
  APWitness witness;
};

struct APSearchResult {
  std::optional<APMatch> match;
  std::uint64_t nodes = 0;
};

struct APSearchOptions {
  unsigned threads = 1;
};

namespace detail {

inline void require_increasing(std::span<const Rational> b) {
  for (std::size_t i = 1; i < b.size(); ++i)
    if (!(b[i - 1] < b[i])) throw domain_error("tuple must be strictly increasing");
}

/// max_i |a_i - b_i| / gap for a given progression.
inline Rational progression_error(std::span<const Rational> b, const APWitness& w) {
  Rational worst = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    worst = std::max(worst, Rational(abs(w.term(static_cast<int>(i)) - b[i])));
  return worst / w.gap;
}

}  // namespace detail

/// Smallest eps for which b is a (k, eps)-AP, with the unique optimal progression.
inline DistortionResult minimax_distortion(std::span<const Rational> b) {
  const std::size_t k = b.size();
  if (k < 3) throw domain_error("minimax_distortion needs at least 3 points");
  detail::require_increasing(b);

  std::optional<Rational> best_e;
  Rational best_u, best_w;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t l = i + 2; l < k; ++l) {
      const Rational w = Rational(static_cast<long>(l - i)) / (b[l] - b[i]);
      for (std::size_t j = i + 1; j < l; ++j) {
        // r_i = r_l = s*E and r_j = -s*E with r_m = m + u - w*b_m.
        const Rational diff = Rational(static_cast<long>(i) - static_cast<long>(j)) + w * (b[j] - b[i]);
        const Rational e = abs(diff) / 2;
        if (best_e && e >= *best_e) continue;
        const Rational se = diff < 0 ? Rational(-e) : e;
        const Rational u = se - Rational(static_cast<long>(i)) + w * b[i];
        bool feasible = true;
        for (std::size_t m = 0; m < k && feasible; ++m)
          feasible = abs(Rational(static_cast<long>(m)) + u - w * b[m]) <= e;
        if (feasible) {
          best_e = e;
          best_u = u;
          best_w = w;
        }
      }
    }
  }
  // A Chebyshev reference always exists for k >= 3 distinct abscissae.
  return {*best_e, APWitness{best_u / best_w, 1 / best_w, static_cast<int>(k)}};
}

inline AlmostAPCheck is_almost_ap(std::span<const Rational> b, const Rational& eps) {
  if (eps < 0) throw domain_error("epsilon must be non-negative");
  auto d = minimax_distortion(b);
  if (d.epsilon_star <= eps) return {true, std::move(d.witness)};
  return {false, std::nullopt};
}

/// Lafont-McReynolds test: every ratio of consecutive gaps is within eps of 1 (strict).
inline bool is_lm_almost_ap(std::span<const Rational> b, const Rational& eps) {
  if (b.size() < 3) throw domain_error("is_lm_almost_ap needs at least 3 points");
  if (eps <= 0) throw domain_error("epsilon must be positive");
  std::vector<Rational> gaps;
  for (std::size_t i = 1; i < b.size(); ++i) {
    gaps.push_back(b[i] - b[i - 1]);
    if (gaps.back() == 0) throw domain_error("repeated consecutive points");
  }
  for (const auto& gi : gaps)
    for (const auto& gj : gaps)
      if (!(abs(gi / gj - 1) < eps)) return false;
  return true;
}

namespace detail {

/// Depth-first search over strictly increasing index tuples of a sorted point list,
/// carrying the exact polygon of feasible (a0, gap) pairs.
class TupleSearch {
 public:
  TupleSearch(std::span<const Rational> pts, int k, const Rational& eps,
              std::optional<std::size_t> required)
      : pts_(pts), k_(k), eps_(eps), required_(required) {}

  /// First tuple (lexicographically) whose leading index is `first`.
  std::optional<std::vector<std::size_t>> run_from(std::size_t first) {
    chosen_.assign(1, first);
    nodes_ = 1;
    const std::size_t n = pts_.size();
    if (n - first < static_cast<std::size_t>(k_)) return std::nullopt;
    if (required_ && first > *required_) return std::nullopt;

    if (required_ && *required_ == n - 1) {
      // Tuple ends at the newest (largest) point: seed the polygon from both ends.
      if (first == *required_) return std::nullopt;
      FeasiblePolygon poly = seed(0, pts_[first], k_ - 1, pts_[*required_]);
      if (poly.empty()) return std::nullopt;
      if (fill_fixed_last(1, poly)) {
        chosen_.push_back(*required_);
        return chosen_;
      }
      return std::nullopt;
    }

    for (std::size_t second = first + 1; second < n; ++second) {
      if (!may_take(second, 1)) break;
      ++nodes_;
      FeasiblePolygon poly = seed(0, pts_[first], 1, pts_[second]);
      if (poly.empty()) continue;
      chosen_.push_back(second);
      if (k_ == 2 || extend(2, poly)) return chosen_;
      chosen_.pop_back();
    }
    return std::nullopt;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  FeasiblePolygon seed(long p, const Rational& bp, long q, const Rational& bq) const {
    // Feasible gaps satisfy (q - p - 2 eps) gap <= bq - bp.
    const Rational span_gap = (bq - bp) / (Rational(q - p) - 2 * eps_);
    const Rational reach = (Rational(p) + eps_) * span_gap;
    FeasiblePolygon poly = FeasiblePolygon::box(bp - reach, bp + eps_ * span_gap, Rational(0), span_gap);
    poly.constrain_term(p, bp, eps_);
    poly.constrain_term(q, bq, eps_);
    return poly;
  }

  bool holds_required() const {
    return !required_ || std::find(chosen_.begin(), chosen_.end(), *required_) != chosen_.end();
  }

  // Whether index c can occupy position pos without breaking the required-index rule
  // or leaving too few points for the remaining positions.
  bool may_take(std::size_t c, int pos) const {
    if (required_ && !holds_required() && c > *required_) return false;
    return pts_.size() - c >= static_cast<std::size_t>(k_ - pos);
  }

  bool extend(int pos, const FeasiblePolygon& poly) {
    if (pos == k_) return holds_required();
    const auto [lo, hi] = poly.term_window(pos, eps_);
    auto it = std::lower_bound(pts_.begin() + static_cast<long>(chosen_.back()) + 1, pts_.end(), lo);
    for (; it != pts_.end() && *it <= hi; ++it) {
      const auto c = static_cast<std::size_t>(it - pts_.begin());
      if (!may_take(c, pos)) break;
      ++nodes_;
      FeasiblePolygon next = poly;
      next.constrain_term(pos, *it, eps_);
      if (next.empty()) continue;
      chosen_.push_back(c);
      if (extend(pos + 1, next)) return true;
      chosen_.pop_back();
    }
    return false;
  }

  bool fill_fixed_last(int pos, const FeasiblePolygon& poly) {
    if (pos == k_ - 1) return true;
    const auto [lo, hi] = poly.term_window(pos, eps_);
    const auto stop = pts_.begin() + static_cast<long>(*required_);
    auto it = std::lower_bound(pts_.begin() + static_cast<long>(chosen_.back()) + 1, stop, lo);
    for (; it != stop && *it <= hi; ++it) {
      ++nodes_;
      FeasiblePolygon next = poly;
      next.constrain_term(pos, *it, eps_);
      if (next.empty()) continue;
      chosen_.push_back(static_cast<std::size_t>(it - pts_.begin()));
      if (fill_fixed_last(pos + 1, next)) return true;
      chosen_.pop_back();
    }
    return false;
  }

  std::span<const Rational> pts_;
  int k_;
  Rational eps_;
  std::optional<std::size_t> required_;
  std::vector<std::size_t> chosen_;
  std::uint64_t nodes_ = 0;
};

inline void validate_search(int k, const Rational& eps) {
  if (k < 3) throw domain_error("k must be at least 3");
  if (eps < 0) throw domain_error("epsilon must be non-negative");
  if (eps >= Rational(1, 2))
    throw unsupported_mode("epsilon >= 1/2 allows overlapping windows; order-matched semantics are undefined");
}

inline APSearchResult search_sorted(std::span<const Rational> pts, int k, const Rational& eps,
                                    std::optional<std::size_t> required, unsigned threads) {
  APSearchResult out;
  if (pts.size() < static_cast<std::size_t>(k)) return out;
  const std::size_t roots = required ? *required + 1 : pts.size() - static_cast<std::size_t>(k) + 1;
  std::vector<std::optional<std::vector<std::size_t>>> found(roots);
  std::vector<std::uint64_t> nodes(roots, 0);
  const auto first = parallel_first(roots, threads, [&](std::size_t i) {
    TupleSearch s(pts, k, eps, required);
    found[i] = s.run_from(i);
    nodes[i] = s.nodes();
    return found[i].has_value();
  });
  const std::size_t last = first ? *first : roots - 1;
  for (std::size_t i = 0; i <= last && i < roots; ++i) out.nodes += nodes[i];
  if (first) {
    std::vector<Rational> tuple;
    for (auto idx : *found[*first]) tuple.push_back(pts[idx]);
    out.match = APMatch{*found[*first], minimax_distortion(tuple).witness};
  }
  return out;
}

}  // namespace detail

/// Lexicographically first (k, eps)-AP among strictly increasing tuples of F.
inline APSearchResult search_almost_ap(const PointSet1D& set, int k, const Rational& eps,
                                       APSearchOptions options = {}) {
  detail::validate_search(k, eps);
  return detail::search_sorted(set.points(), k, eps, std::nullopt, resolve_threads(options.threads));
}

inline std::optional<APMatch> contains_almost_ap(const PointSet1D& set, int k, const Rational& eps,
                                                 APSearchOptions options = {}) {
  return search_almost_ap(set, k, eps, options).match;
}

/// First (k, eps)-AP of the sorted list `pts` that uses the point at index `through`.
inline std::optional<APMatch> find_almost_ap_through(std::span<const Rational> pts, std::size_t through, int k,
                                                     const Rational& eps) {
  detail::validate_search(k, eps);
  if (through >= pts.size()) throw domain_error("index out of range");
  return detail::search_sorted(pts, k, eps, through, 1).match;
}

}  // namespace apavoid
