#pragma once

// Orthonormal frames e = (e_1, ..., e_m) in R^d with rational components.

#include <cstddef>
#include <optional>
#include <vector>

#include "apavoid/errors.hpp"
#include "apavoid/point_set.hpp"
#include "apavoid/rational.hpp"
#include "apavoid/real.hpp"

namespace apavoid {

/// Irrational directions are stored as rational roundings of 60-digit values;
/// `error` bounds |e_i . e_j - delta_ij| over all pairs.
class Orientation {
 public:
  /// Frame of coordinate axes, e.g. axes(2, {0}) = {e_1} in R^2.
  static Orientation axes(std::size_t d, const std::vector<std::size_t>& which) {
    std::vector<PointD> vs;
    for (auto i : which) {
      if (i >= d) throw domain_error("axis index out of range");
      PointD v(d, Rational(0));
      v[i] = 1;
      vs.push_back(std::move(v));
    }
    return Orientation(d, std::move(vs));
  }

  /// Unit vector (cos theta, sin theta) in R^2.
  static Orientation from_angle(const Real& theta) {
    return Orientation(2, {PointD{to_rational(cos(theta)), to_rational(sin(theta))}});
  }

  /// Normalises each vector; they must already be mutually orthogonal.
  static Orientation normalized(std::size_t d, const std::vector<PointD>& vectors) {
    std::vector<PointD> vs;
    for (const auto& v : vectors) {
      if (v.size() != d) throw domain_error("direction dimension mismatch");
      Rational norm2 = 0;
      for (const auto& c : v) norm2 += c * c;
      if (norm2 == 0) throw domain_error("zero direction vector");
      const Real inv = 1 / sqrt(to_real(norm2));
      PointD u;
      for (const auto& c : v) u.push_back(to_rational(to_real(c) * inv));
      vs.push_back(std::move(u));
    }
    return Orientation(d, std::move(vs));
  }

  /// Vectors used as given; rejected unless orthonormal within `tolerance`.
  Orientation(std::size_t d, std::vector<PointD> vectors, const Rational& tolerance = Rational(1, BigInt("1000000000000000000000000000000")))
      : d_(d), vectors_(std::move(vectors)) {
    if (d_ == 0) throw domain_error("dimension must be positive");
    if (vectors_.empty() || vectors_.size() > d_) throw domain_error("need 1 <= m <= d direction vectors");
    for (const auto& v : vectors_)
      if (v.size() != d_) throw domain_error("direction dimension mismatch");
    for (std::size_t i = 0; i < vectors_.size(); ++i)
      for (std::size_t j = i; j < vectors_.size(); ++j) {
        Rational dot = 0;
        for (std::size_t c = 0; c < d_; ++c) dot += vectors_[i][c] * vectors_[j][c];
        const Rational dev = abs(dot - (i == j ? 1 : 0));
        if (dev > error_) error_ = dev;
      }
    if (error_ > tolerance) throw domain_error("orientation is not orthonormal");
  }

  std::size_t dimension() const { return d_; }
  std::size_t rank() const { return vectors_.size(); }
  const std::vector<PointD>& vectors() const { return vectors_; }
  const PointD& operator[](std::size_t i) const { return vectors_[i]; }
  const Rational& error() const { return error_; }

  /// Axis index of each vector when the frame consists of coordinate axes.
  std::optional<std::vector<std::size_t>> axis_indices() const {
    std::vector<std::size_t> out;
    for (const auto& v : vectors_) {
      std::optional<std::size_t> axis;
      for (std::size_t c = 0; c < d_; ++c) {
        if (v[c] == 0) continue;
        if (abs(v[c]) != 1 || axis) return std::nullopt;
        axis = c;
      }
      if (!axis) return std::nullopt;
      out.push_back(*axis);
    }
    return out;
  }

 private:
  std::size_t d_;
  std::vector<PointD> vectors_;
  Rational error_ = 0;
};

}  // namespace apavoid
