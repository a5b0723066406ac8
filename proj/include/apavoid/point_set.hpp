#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "apavoid/rational.hpp"

namespace apavoid {

/// Finite subset of the line; construction sorts and drops duplicates.
class PointSet1D {
 public:
  PointSet1D() = default;
  explicit PointSet1D(std::vector<Rational> points) : points_(std::move(points)) {
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  static PointSet1D from_integers(std::span<const long> values) {
    std::vector<Rational> pts;
    pts.reserve(values.size());
    for (long v : values) pts.emplace_back(v);
    return PointSet1D(std::move(pts));
  }

  std::span<const Rational> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Rational& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  friend bool operator==(const PointSet1D&, const PointSet1D&) = default;

 private:
  std::vector<Rational> points_;
};

using PointD = std::vector<Rational>;

/// Finite subset of R^d, stored in lexicographic order without duplicates.
class PointSetD {
 public:
  PointSetD() = default;
  PointSetD(std::size_t dimension, std::vector<PointD> points)
      : dimension_(dimension), points_(std::move(points)) {
    if (dimension_ == 0) throw domain_error("point set dimension must be positive");
    for (const auto& p : points_)
      if (p.size() != dimension_) throw domain_error("point dimension mismatch");
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  }

  std::size_t dimension() const { return dimension_; }
  std::span<const PointD> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PointD& operator[](std::size_t i) const { return points_[i]; }

  /// Cartesian product A x B of two 1D sets.
  static PointSetD product(const PointSet1D& a, const PointSet1D& b) {
    std::vector<PointD> pts;
    pts.reserve(a.size() * b.size());
    for (const auto& x : a)
      for (const auto& y : b) pts.push_back({x, y});
    return PointSetD(2, std::move(pts));
  }

  /// Integer lattice {0..n-1}^d scaled by `scale`.
  static PointSetD grid(std::size_t d, long n, const Rational& scale = 1) {
    std::vector<PointD> pts;
    std::vector<long> idx(d, 0);
    while (true) {
      PointD p(d);
      for (std::size_t i = 0; i < d; ++i) p[i] = Rational(idx[i]) * scale;
      pts.push_back(std::move(p));
      std::size_t i = d;
      while (i > 0) {
        --i;
        if (++idx[i] < n) break;
        idx[i] = 0;
        if (i == 0) return PointSetD(d, std::move(pts));
      }
      if (d == 0) break;
    }
    return PointSetD(d, std::move(pts));
  }

  friend bool operator==(const PointSetD&, const PointSetD&) = default;

 private:
  std::size_t dimension_ = 1;
  std::vector<PointD> points_;
};

}  // namespace apavoid
