#pragma once

// Arithmetic patches t + Delta * sum x_i e_i, x in {0..k-1}^m, in R^d: fitting,
// containment search, the cube-deletion audit and sampled direction sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "apavoid/bounds.hpp"
#include "apavoid/enclosing_ball.hpp"
#include "apavoid/errors.hpp"
#include "apavoid/orientation.hpp"
#include "apavoid/parallel.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"
#include "apavoid/real.hpp"

namespace apavoid {

enum class PatchMetric { euclidean, chebyshev };

inline std::string to_string(PatchMetric m) { return m == PatchMetric::euclidean ? "euclidean" : "chebyshev"; }

struct PatchSpec {
  Orientation orientation;
  int k = 0;
  Rational delta;
  PointD anchor;

  std::size_t dimension() const { return orientation.dimension(); }
};

/// When the infimum is only approached as Delta grows without bound, chebyshev mode
/// reports delta = 0 and euclidean mode a large finite delta.
struct PatchFit {
  double epsilon = 0;
  std::optional<Rational> exact_epsilon;  // chebyshev mode only
  PatchSpec spec;
  PatchMetric metric = PatchMetric::euclidean;
};

struct PatchWitness {
  PatchSpec spec;
  std::vector<std::size_t> matching;  // F index for every site, in lexicographic site order
  double epsilon = 0;                 // distortion attained by the matched points
  PatchMetric metric = PatchMetric::euclidean;
};

/// Multi-indices {0..k-1}^m in lexicographic order.
inline std::vector<std::vector<int>> lattice_sites(int k, std::size_t m) {
  if (k < 2) throw domain_error("k must be at least 2");
  std::vector<std::vector<int>> out{std::vector<int>(m, 0)};
  while (true) {
    auto next = out.back();
    std::size_t i = m;
    while (i > 0 && next[i - 1] == k - 1) next[--i] = 0;
    if (i == 0) return out;
    ++next[i - 1];
    out.push_back(std::move(next));
  }
}

/// Site offsets sum x_i e_i, lexicographic order.
inline std::vector<PointD> site_offsets(const Orientation& e, int k) {
  std::vector<PointD> out;
  for (const auto& x : lattice_sites(k, e.rank())) {
    PointD v(e.dimension(), Rational(0));
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t c = 0; c < v.size(); ++c) v[c] += x[i] * e[i][c];
    out.push_back(std::move(v));
  }
  return out;
}

namespace detail {

using Vec = std::vector<double>;

inline Vec to_vec(const PointD& p) {
  Vec v;
  v.reserve(p.size());
  for (const auto& c : p) v.push_back(to_double(c));
  return v;
}

inline void validate_assignment(std::span<const PointD> assignment, const Orientation& e, int k) {
  if (assignment.empty()) throw domain_error("empty assignment");
  if (k < 2) throw domain_error("k must be at least 2");
  std::size_t sites = 1;
  for (std::size_t i = 0; i < e.rank(); ++i) sites *= static_cast<std::size_t>(k);
  if (assignment.size() != sites) throw domain_error("assignment needs exactly k^m points");
  for (const auto& p : assignment)
    if (p.size() != e.dimension()) throw domain_error("point dimension does not match orientation");
}

struct EuclideanFit {
  double epsilon = 0;
  double delta = 1;
  Vec anchor;
};

// min over s = 1/Delta of g(s) = radius of the smallest ball around {s y_x - v_x};
// g is convex, so golden-section search on a bracket [0, S] with g(S) >= g(0).
inline EuclideanFit euclidean_fit(const std::vector<Vec>& y_raw, const std::vector<Vec>& v) {
  const std::size_t n = y_raw.size(), d = y_raw[0].size();
  Vec mean(d, 0);
  for (const auto& p : y_raw)
    for (std::size_t c = 0; c < d; ++c) mean[c] += p[c] / static_cast<double>(n);
  std::vector<Vec> y = y_raw;
  for (auto& p : y)
    for (std::size_t c = 0; c < d; ++c) p[c] -= mean[c];

  std::vector<Vec> w(n, Vec(d));
  auto ball_at = [&](double s) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) w[i][c] = s * y[i][c] - v[i][c];
    return min_enclosing_ball(w);
  };

  const Ball at_zero = ball_at(0);
  double spread = 0, offset_gap = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double sy = dist(y[a], y[b]);
      if (sy > spread) {
        spread = sy;
        offset_gap = dist(v[a], v[b]);
      }
    }
  if (spread == 0) {
    // Every site sees the same point: any Delta works with the same ratio.
    Vec anchor(d);
    for (std::size_t c = 0; c < d; ++c) anchor[c] = mean[c] - at_zero.center[c];
    return {at_zero.radius, 1, anchor};
  }

  double lo = 0, hi = (2 * at_zero.radius + offset_gap) / spread;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = ball_at(x1).radius, f2 = ball_at(x2).radius;
  while (hi - lo > 1e-14 * (1 + hi)) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = ball_at(x1).radius;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = ball_at(x2).radius;
    }
  }
  double s = (lo + hi) / 2;
  Ball best = ball_at(s);
  if (at_zero.radius <= best.radius) {
    // Infimum approached as Delta grows; report a large finite Delta.
    s = std::max(s, 1e-12 * (1 + hi));
    best = ball_at(s);
  }
  Vec anchor(d);
  for (std::size_t c = 0; c < d; ++c) anchor[c] = best.center[c] / s + mean[c];
  return {best.radius, 1 / s, anchor};
}

// Exact chebyshev fit: h(s) = max_c (max_x - min_x)(s y_xc - v_xc) / 2 is convex and
// piecewise linear with breakpoints among the pairwise crossings.
struct ChebyshevFit {
  Rational epsilon;
  std::optional<Rational> s;
  PointD u;
};

inline ChebyshevFit chebyshev_fit(std::span<const PointD> y, const std::vector<PointD>& v) {
  const std::size_t n = y.size(), d = y[0].size();
  auto value = [&](const Rational& s, PointD* centre) {
    Rational h = 0;
    for (std::size_t c = 0; c < d; ++c) {
      Rational mx = s * y[0][c] - v[0][c], mn = mx;
      for (std::size_t i = 1; i < n; ++i) {
        const Rational z = s * y[i][c] - v[i][c];
        if (z > mx) mx = z;
        if (z < mn) mn = z;
      }
      if (centre) (*centre)[c] = (mx + mn) / 2;
      h = std::max(h, Rational((mx - mn) / 2));
    }
    return h;
  };
  auto right_slope = [&](const Rational& s) {
    const Rational h = value(s, nullptr);
    std::optional<Rational> slope;
    for (std::size_t c = 0; c < d; ++c) {
      Rational mx = s * y[0][c] - v[0][c], mn = mx, top = y[0][c], bottom = y[0][c];
      for (std::size_t i = 1; i < n; ++i) {
        const Rational z = s * y[i][c] - v[i][c];
        if (z > mx) {
          mx = z;
          top = y[i][c];
        } else if (z == mx && y[i][c] > top) {
          top = y[i][c];
        }
        if (z < mn) {
          mn = z;
          bottom = y[i][c];
        } else if (z == mn && y[i][c] < bottom) {
          bottom = y[i][c];
        }
      }
      if ((mx - mn) / 2 != h) continue;
      const Rational sl = (top - bottom) / 2;
      if (!slope || sl > *slope) slope = sl;
    }
    return *slope;
  };

  std::vector<Rational> cand{Rational(0)};
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (y[a][c] == y[b][c]) continue;
        const Rational s = (v[a][c] - v[b][c]) / (y[a][c] - y[b][c]);
        if (s > 0) cand.push_back(s);
      }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  std::size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (right_slope(cand[mid]) >= 0)
      hi = mid;
    else
      lo = mid + 1;
  }
  ChebyshevFit fit;
  fit.u.assign(d, Rational(0));
  fit.epsilon = value(cand[lo], &fit.u);
  if (cand[lo] > 0) fit.s = cand[lo];
  return fit;
}

}  // namespace detail

/// inf over (t, Delta > 0) of max_x |y_x - t - Delta v_x| / Delta for points assigned
/// to sites in lexicographic order. Euclidean mode is accurate to about 1e-9;
/// chebyshev mode (max-norm) is exact.
inline PatchFit patch_distortion(std::span<const PointD> assignment, const Orientation& e, int k,
                                 PatchMetric metric = PatchMetric::euclidean) {
  detail::validate_assignment(assignment, e, k);
  const auto offsets = site_offsets(e, k);
  if (metric == PatchMetric::chebyshev) {
    const auto fit = detail::chebyshev_fit(assignment, offsets);
    PatchFit out{to_double(fit.epsilon), fit.epsilon, {e, k, Rational(1), {}}, metric};
    // With s = 0 the ratio is attained by every Delta large enough; Delta = 1 scaled accordingly is reported.
    const Rational s = fit.s.value_or(Rational(0));
    if (s > 0) {
      out.spec.delta = 1 / s;
      for (const auto& u : fit.u) out.spec.anchor.push_back(u / s);
    } else {
      out.spec.delta = 0;
      out.spec.anchor.assign(e.dimension(), Rational(0));
    }
    return out;
  }
  std::vector<detail::Vec> y, v;
  for (const auto& p : assignment) y.push_back(detail::to_vec(p));
  for (const auto& o : offsets) v.push_back(detail::to_vec(o));
  const auto fit = detail::euclidean_fit(y, v);
  PatchFit out{fit.epsilon, std::nullopt, {e, k, from_double(fit.delta), {}}, metric};
  for (double c : fit.anchor) out.spec.anchor.push_back(from_double(c));
  return out;
}

struct PatchSearchOptions {
  std::size_t multi_limit = 256;  // largest |F| searched when m >= 2
  unsigned threads = 1;
  double tolerance = 1e-9;
};

namespace detail {

struct DeltaRange {
  double lo = 0;
  double hi = std::numeric_limits<double>::infinity();
  bool empty() const { return lo > hi; }
};

// Delta > 0 with |w - Delta dv| <= 2 eps Delta + tau; relaxed to everything when
// the set is not an interval (2 eps >= |dv|).
inline DeltaRange pair_range(const Vec& w, const Vec& dv, double eps, double tau) {
  double vv = 0, wv = 0, ww = 0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    vv += dv[c] * dv[c];
    wv += w[c] * dv[c];
    ww += w[c] * w[c];
  }
  const double a = vv - 4 * eps * eps, b = -2 * (wv + 2 * eps * tau), cc = ww - tau * tau;
  if (a <= 0) return {};
  const double disc = b * b - 4 * a * cc;
  if (disc < 0) return {1, 0};
  const double root = std::sqrt(disc);
  return {std::max(0.0, (-b - root) / (2 * a)), (-b + root) / (2 * a)};
}

class PatchSearch {
 public:
  PatchSearch(const std::vector<Vec>& pts, const std::vector<Vec>& offsets, double eps, double tol)
      : pts_(pts), offsets_(offsets), eps_(eps), tol_(tol), tau_(tol * scale(pts)) {}

  std::optional<std::vector<std::size_t>> run(std::size_t first) {
    chosen_.assign({first});
    if (descend(DeltaRange{})) return chosen_;
    return std::nullopt;
  }

 private:
  static double scale(const std::vector<Vec>& pts) {
    double s = 1;
    for (const auto& p : pts)
      for (double c : p) s = std::max(s, std::abs(c));
    return s;
  }

  bool descend(const DeltaRange& range) {
    const std::size_t j = chosen_.size();
    if (j == offsets_.size()) return accept();
    const Vec& anchor = pts_[chosen_[0]];
    std::size_t begin = 0, end = pts_.size();
    if (std::isfinite(range.hi)) {
      const double v = offsets_[j][0];
      const double reach = 2 * eps_ * range.hi + tau_;
      const double lo = anchor[0] + std::min(range.lo * v, range.hi * v) - reach;
      const double hi = anchor[0] + std::max(range.lo * v, range.hi * v) + reach;
      begin = static_cast<std::size_t>(
          std::lower_bound(pts_.begin(), pts_.end(), lo, [](const Vec& p, double x) { return p[0] < x; }) - pts_.begin());
      end = static_cast<std::size_t>(
          std::upper_bound(pts_.begin(), pts_.end(), hi, [](double x, const Vec& p) { return x < p[0]; }) - pts_.begin());
    }
    Vec w(pts_[0].size()), dv(w.size());
    for (std::size_t cand = begin; cand < end; ++cand) {
      DeltaRange r = range;
      for (std::size_t i = 0; i < j && !r.empty(); ++i) {
        for (std::size_t c = 0; c < w.size(); ++c) {
          w[c] = pts_[cand][c] - pts_[chosen_[i]][c];
          dv[c] = offsets_[j][c] - offsets_[i][c];
        }
        const DeltaRange p = pair_range(w, dv, eps_, tau_);
        r.lo = std::max(r.lo, p.lo);
        r.hi = std::min(r.hi, p.hi);
      }
      if (r.empty() || r.hi <= 0) continue;
      chosen_.push_back(cand);
      if (descend(r)) return true;
      chosen_.pop_back();
    }
    return false;
  }

  bool accept() const {
    std::vector<Vec> y;
    for (auto i : chosen_) y.push_back(pts_[i]);
    return euclidean_fit(y, offsets_).epsilon <= eps_ + tol_;
  }

  const std::vector<Vec>& pts_;
  const std::vector<Vec>& offsets_;
  double eps_, tol_, tau_;
  std::vector<std::size_t> chosen_;
};

inline void validate_patch_params(std::size_t d, int k, const Rational& eps) {
  if (k < 2) throw domain_error("k must be at least 2");
  if (eps < 0 || eps * eps * static_cast<long>(d) >= 1) throw domain_error("epsilon must lie in [0, 1/sqrt(d))");
}

}  // namespace detail

/// First patch (lexicographic in the F indices assigned to successive sites) whose
/// sites each have a point of F within eps * Delta; points may serve several sites.
inline std::optional<PatchWitness> contains_patch(const PointSetD& f, int k, const Rational& eps, const Orientation& e,
                                                  PatchSearchOptions options = {}) {
  if (f.empty()) throw domain_error("point set is empty");
  if (f.dimension() != e.dimension()) throw domain_error("orientation dimension does not match the set");
  detail::validate_patch_params(f.dimension(), k, eps);
  if (e.rank() >= 2 && f.size() > options.multi_limit)
    throw resource_error("patch search with m >= 2 is limited to " + std::to_string(options.multi_limit) + " points");

  std::vector<detail::Vec> pts, offsets;
  for (const auto& p : f.points()) pts.push_back(detail::to_vec(p));
  for (const auto& o : site_offsets(e, k)) offsets.push_back(detail::to_vec(o));
  const double epsd = to_double(eps);

  std::vector<std::optional<std::vector<std::size_t>>> found(pts.size());
  const auto first = parallel_first(pts.size(), resolve_threads(options.threads), [&](std::size_t i) {
    detail::PatchSearch search(pts, offsets, epsd, options.tolerance);
    found[i] = search.run(i);
    return found[i].has_value();
  });
  if (!first) return std::nullopt;

  const auto& matching = *found[*first];
  std::vector<PointD> assigned;
  for (auto i : matching) assigned.push_back(f[i]);
  const PatchFit fit = patch_distortion(assigned, e, k);
  return PatchWitness{fit.spec, matching, fit.epsilon, PatchMetric::euclidean};
}

struct Cube {
  PointD corner;
  Rational side;
};

struct AuditLevel {
  int level = 0;
  std::uint64_t parents = 0;                  // occupied cubes one level up
  std::uint64_t bound = 0;                    // parents * per-parent bound
  std::uint64_t observed = 0;                 // occupied cubes at this level
  std::uint64_t max_in_parent = 0;            // most occupied subcubes in one parent
  std::uint64_t fully_occupied_collections = 0;  // k^m lattices of subcubes all hit
};

struct DeletionAudit {
  long d = 0, m = 0;
  int k = 0;
  Rational epsilon;
  Real epsilon_prime;  // sqrt(d) / (2q): the rounded tolerance the count really uses
  BigInt q;            // ceil(sqrt(d) / (2 eps))
  std::uint64_t cubes_per_side = 0;
  std::uint64_t faces = 0;             // per parent
  std::uint64_t deletions_per_face = 0;
  std::uint64_t per_parent_bound = 0;  // (kq)^d (1 - 1/k^m)
  std::vector<AuditLevel> levels;

  bool within_bound() const {
    for (const auto& l : levels)
      if (l.observed > l.bound || l.max_in_parent > per_parent_bound) return false;
    return true;
  }
};

namespace detail {

inline std::uint64_t checked_pow(std::uint64_t base, long exp) {
  std::uint64_t out = 1;
  for (long i = 0; i < exp; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / base / 4) throw resource_error("audit grid too large");
    out *= base;
  }
  return out;
}

}  // namespace detail

/// Splits Q into (kq)^d subcubes per level, groups them into faces parallel to
/// span(e), and compares occupied counts with the deletion bound. A k^m lattice of
/// subcubes with spacing q that is fully occupied yields an (k, eps, e)-patch, so a
/// patch-free set never has one. Orientations must be coordinate axes.
inline DeletionAudit grid_deletion_audit(const PointSetD& f, const Cube& cube, int k, const Rational& eps,
                                         const Orientation& e, int levels) {
  const long d = static_cast<long>(f.dimension());
  const long m = static_cast<long>(e.rank());
  if (static_cast<std::size_t>(d) != e.dimension() || cube.corner.size() != f.dimension())
    throw domain_error("dimension mismatch");
  if (eps <= 0 || eps * eps * d >= 1) throw domain_error("epsilon must lie in (0, 1/sqrt(d))");
  if (k < 2) throw domain_error("k must be at least 2");
  if (cube.side <= 0) throw domain_error("cube side must be positive");
  if (levels < 1) throw domain_error("need at least one level");
  const auto axes = e.axis_indices();
  if (!axes) throw domain_error("the deletion audit needs an axis-aligned orientation");
  std::vector<bool> along(static_cast<std::size_t>(d), false);
  for (auto a : *axes) along[a] = true;

  DeletionAudit audit;
  audit.d = d;
  audit.m = m;
  audit.k = k;
  audit.epsilon = eps;
  audit.q = cube_ceiling(d, eps);
  audit.epsilon_prime = sqrt(Real(d)) / (2 * Real(audit.q));
  const auto q = audit.q.convert_to<std::uint64_t>();
  const std::uint64_t n = static_cast<std::uint64_t>(k) * q;
  audit.cubes_per_side = n;
  audit.faces = detail::checked_pow(n, d - m);
  audit.deletions_per_face = detail::checked_pow(q, m);
  audit.per_parent_bound = detail::checked_pow(n, d) - audit.faces * audit.deletions_per_face;

  // Points of F in the closed cube, as fractions of the side.
  std::vector<PointD> local;
  for (const auto& p : f.points()) {
    PointD u;
    bool in = true;
    for (std::size_t c = 0; c < p.size() && in; ++c) {
      const Rational x = (p[c] - cube.corner[c]) / cube.side;
      in = x >= 0 && x <= 1;
      u.push_back(x);
    }
    if (in) local.push_back(std::move(u));
  }
  if (local.empty()) throw domain_error("no point of the set lies in the cube");

  const auto sites = lattice_sites(k, static_cast<std::size_t>(m));
  std::uint64_t parents = 1;
  for (int level = 1; level <= levels; ++level) {
    const std::uint64_t per_side = detail::checked_pow(n, level);
    std::set<std::vector<std::uint64_t>> cells;
    for (const auto& u : local) {
      std::vector<std::uint64_t> cell;
      for (const auto& x : u) {
        auto idx = floor_div(x * Rational(BigInt(per_side))).convert_to<std::uint64_t>();
        cell.push_back(std::min(idx, per_side - 1));
      }
      cells.insert(std::move(cell));
    }
    AuditLevel rec{level, parents, parents * audit.per_parent_bound, cells.size(), 0, 0};
    std::map<std::vector<std::uint64_t>, std::uint64_t> per_parent;
    for (const auto& cell : cells) {
      std::vector<std::uint64_t> parent;
      for (auto c : cell) parent.push_back(c / n);
      ++per_parent[parent];
      // Count each collection once, from its base cell (all along-axis local indices < q).
      bool base = true;
      for (std::size_t c = 0; c < cell.size(); ++c)
        if (along[c] && cell[c] % n >= q) base = false;
      if (!base) continue;
      bool full = true;
      for (const auto& x : sites) {
        auto other = cell;
        for (std::size_t i = 0; i < x.size(); ++i) other[(*axes)[i]] += q * static_cast<std::uint64_t>(x[i]);
        if (!cells.count(other)) {
          full = false;
          break;
        }
      }
      if (full) ++rec.fully_occupied_collections;
    }
    for (const auto& [parent, count] : per_parent) rec.max_in_parent = std::max(rec.max_in_parent, count);
    audit.levels.push_back(rec);
    parents = cells.size();
  }
  return audit;
}

struct SweepEntry {
  Orientation direction;
  std::optional<Real> angle;
  std::optional<PatchWitness> witness;
};

/// Per-direction search. Only the listed directions are examined.
struct SweepReport {
  std::vector<SweepEntry> entries;
  std::size_t with_witness = 0;
  std::size_t without_witness = 0;
};

/// `count` unit vectors at angles pi j / count; a patch along -e is one along e.
inline std::vector<std::pair<Real, Orientation>> equally_spaced_directions(int count) {
  if (count < 1) throw domain_error("need at least one direction");
  std::vector<std::pair<Real, Orientation>> out;
  const Real pi = acos(Real(-1));
  for (int j = 0; j < count; ++j) {
    const Real theta = pi * j / count;
    out.emplace_back(theta, Orientation::from_angle(theta));
  }
  return out;
}

inline SweepReport direction_sweep(const PointSetD& f, int k, const Rational& eps,
                                   const std::vector<Orientation>& directions, PatchSearchOptions options = {},
                                   const std::vector<Real>& angles = {}) {
  for (const auto& dir : directions)
    if (dir.rank() != 1) throw domain_error("sweep directions must be single vectors");
  SweepReport report;
  std::vector<std::optional<PatchWitness>> found(directions.size());
  PatchSearchOptions inner = options;
  inner.threads = 1;
  parallel_for(directions.size(), resolve_threads(options.threads),
               [&](std::size_t i) { found[i] = contains_patch(f, k, eps, directions[i], inner); });
  for (std::size_t i = 0; i < directions.size(); ++i) {
    std::optional<Real> angle;
    if (i < angles.size()) angle = angles[i];
    report.entries.push_back({directions[i], angle, found[i]});
    if (found[i])
      ++report.with_witness;
    else
      ++report.without_witness;
  }
  return report;
}

}  // namespace apavoid
