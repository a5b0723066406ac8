#pragma once

// Smallest enclosing ball of a small point cloud in R^d (move-to-front Welzl).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace apavoid::detail {

struct Ball {
  std::vector<double> center;
  double radius = -1;  // negative for the empty ball
};

inline double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline bool inside(const Ball& b, const std::vector<double>& p) {
  return b.radius >= 0 && dist(b.center, p) <= b.radius + 1e-12 * (1 + b.radius);
}

// Ball with every point of `boundary` on its sphere; for affinely dependent
// input, the smallest sub-circumball that still contains them all.
inline Ball circumball(const std::vector<const std::vector<double>*>& boundary) {
  const std::size_t b = boundary.size();
  if (b == 0) return {};
  const auto& p0 = *boundary[0];
  const std::size_t d = p0.size();
  if (b == 1) return {p0, 0};

  const std::size_t n = b - 1;
  std::vector<std::vector<double>> q(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) q[i][c] = (*boundary[i + 1])[c] - p0[c];
  // Gram system G lambda = diag(G) / 2.
  std::vector<std::vector<double>> g(n, std::vector<double>(n + 1));
  double scale = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t c = 0; c < d; ++c) s += q[i][c] * q[j][c];
      g[i][j] = s;
    }
    g[i][n] = g[i][i] / 2;
    scale = std::max(scale, g[i][i]);
  }
  bool singular = n > d;
  for (std::size_t col = 0; col < n && !singular; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
    if (std::abs(g[piv][col]) <= 1e-12 * scale) {
      singular = true;
      break;
    }
    std::swap(g[piv], g[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = g[r][col] / g[col][col];
      for (std::size_t c = col; c <= n; ++c) g[r][c] -= f * g[col][c];
    }
  }
  if (!singular) {
    Ball ball{p0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = g[i][n] / g[i][i];
      for (std::size_t c = 0; c < d; ++c) ball.center[c] += lambda * q[i][c];
    }
    ball.radius = dist(ball.center, p0);
    return ball;
  }
  Ball best;
  for (std::size_t drop = 0; drop < b; ++drop) {
    auto sub = boundary;
    sub.erase(sub.begin() + static_cast<long>(drop));
    const Ball cand = circumball(sub);
    bool all = true;
    for (const auto* p : boundary) all = all && inside(cand, *p);
    if (all && (best.radius < 0 || cand.radius < best.radius)) best = cand;
  }
  return best;
}

inline Ball move_to_front(std::vector<const std::vector<double>*>& pts, std::size_t n,
                          std::vector<const std::vector<double>*>& boundary, std::size_t d) {
  Ball ball = circumball(boundary);
  if (boundary.size() == d + 1) return ball;
  for (std::size_t i = 0; i < n; ++i) {
    if (inside(ball, *pts[i])) continue;
    boundary.push_back(pts[i]);
    ball = move_to_front(pts, i, boundary, d);
    boundary.pop_back();
    std::rotate(pts.begin(), pts.begin() + static_cast<long>(i), pts.begin() + static_cast<long>(i) + 1);
  }
  return ball;
}

inline Ball min_enclosing_ball(const std::vector<std::vector<double>>& points) {
  if (points.empty()) return {};
  std::vector<const std::vector<double>*> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back(&p);
  std::vector<const std::vector<double>*> boundary;
  return move_to_front(pts, pts.size(), boundary, points.front().size());
}

}  // namespace apavoid::detail
