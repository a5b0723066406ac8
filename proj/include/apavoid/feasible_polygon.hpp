#pragma once

#include <algorithm>
#include <vector>

#include "apavoid/rational.hpp"

namespace apavoid {

/// Convex polygon in the (a0, gap) plane with exact rational vertices.
/// Degenerate shapes (segment, single point) are allowed; no vertices means empty.
class FeasiblePolygon {
 public:
  struct Vertex {
    Rational a0;
    Rational gap;
    friend bool operator==(const Vertex&, const Vertex&) = default;
  };

  FeasiblePolygon() = default;

  static FeasiblePolygon box(const Rational& a_lo, const Rational& a_hi, const Rational& g_lo,
                             const Rational& g_hi) {
    FeasiblePolygon p;
    p.vertices_ = {{a_lo, g_lo}, {a_hi, g_lo}, {a_hi, g_hi}, {a_lo, g_hi}};
    p.dedupe();
    return p;
  }

  bool empty() const { return vertices_.empty(); }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  /// Intersects with the half-plane  ca * a0 + cg * gap <= rhs.
  void clip(const Rational& ca, const Rational& cg, const Rational& rhs) {
    if (vertices_.empty()) return;
    const std::size_t n = vertices_.size();
    std::vector<Rational> slack(n);
    bool all_in = true;
    for (std::size_t i = 0; i < n; ++i) {
      slack[i] = ca * vertices_[i].a0 + cg * vertices_[i].gap - rhs;
      if (slack[i] > 0) all_in = false;
    }
    if (all_in) return;

    std::vector<Vertex> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const bool in_i = slack[i] <= 0;
      const bool in_j = slack[j] <= 0;
      if (in_i) out.push_back(vertices_[i]);
      if (in_i != in_j && n > 1) {
        const Rational t = slack[i] / (slack[i] - slack[j]);
        out.push_back({vertices_[i].a0 + t * (vertices_[j].a0 - vertices_[i].a0),
                       vertices_[i].gap + t * (vertices_[j].gap - vertices_[i].gap)});
      }
    }
    vertices_ = std::move(out);
    dedupe();
  }

  /// Restricts to parameters placing term `index` within eps*gap of `value`:
  ///   |a0 + index*gap - value| <= eps*gap.
  void constrain_term(long index, const Rational& value, const Rational& eps) {
    clip(Rational(1), Rational(index) - eps, value);
    clip(Rational(-1), -(Rational(index) + eps), -value);
  }

  /// Range of values the term at `index` may take while staying feasible:
  /// [min(a0 + (index - eps) gap), max(a0 + (index + eps) gap)].
  std::pair<Rational, Rational> term_window(long index, const Rational& eps) const {
    Rational lo = vertices_.front().a0 + (Rational(index) - eps) * vertices_.front().gap;
    Rational hi = vertices_.front().a0 + (Rational(index) + eps) * vertices_.front().gap;
    for (const auto& v : vertices_) {
      lo = std::min(lo, Rational(v.a0 + (Rational(index) - eps) * v.gap));
      hi = std::max(hi, Rational(v.a0 + (Rational(index) + eps) * v.gap));
    }
    return {lo, hi};
  }

 private:
  void dedupe() {
    std::vector<Vertex> out;
    out.reserve(vertices_.size());
    for (auto& v : vertices_)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
    vertices_ = std::move(out);
  }

  std::vector<Vertex> vertices_;
};

}  // namespace apavoid
