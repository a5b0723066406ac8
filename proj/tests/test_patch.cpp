#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "apavoid/cantor.hpp"
#include "apavoid/dimension.hpp"
#include "apavoid/patch.hpp"
#include "oracles.hpp"

using apavoid::Orientation;
using apavoid::PatchMetric;
using apavoid::PointD;
using apavoid::PointSetD;
using apavoid::Rational;

namespace {

const Orientation plane = Orientation::axes(2, {0, 1});
const Orientation e1 = Orientation::axes(2, {0});

std::vector<PointD> unit_lattice() {
  std::vector<PointD> out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.push_back({Rational(i), Rational(j)});
  return out;
}

std::vector<std::array<double, 2>> planar(const std::vector<PointD>& pts) {
  std::vector<std::array<double, 2>> out;
  for (const auto& p : pts) out.push_back({apavoid::to_double(p[0]), apavoid::to_double(p[1])});
  return out;
}

PointSetD integer_grid(int n, const Rational& scale = 1) { return PointSetD::grid(2, n, scale); }

PointSetD cantor_square(int depth) {
  const Rational eps(1, 10);
  const auto set = apavoid::build_theorem3_set(3, eps, depth, apavoid::RatioSchedule::constant(3, eps, Rational(3, 20)));
  const auto line = apavoid::discretize(set);
  return PointSetD::product(line, line);
}

std::vector<Rational> random_line(std::mt19937_64& rng, int n, long range) {
  std::vector<Rational> out;
  for (int i = 0; i < n; ++i) out.push_back(oracle::random_rational(rng, 0, range, 7));
  return out;
}

// Every assignment of F points to the k sites of a line patch, decided by patch_distortion.
bool brute_line_patch(const PointSetD& f, int k, const Rational& eps, const Orientation& e) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    std::vector<PointD> pts;
    for (auto i : idx) pts.push_back(f[i]);
    if (apavoid::patch_distortion(pts, e, k).epsilon <= apavoid::to_double(eps) + 1e-9) return true;
    std::size_t pos = idx.size();
    while (pos > 0 && idx[pos - 1] == f.size() - 1) idx[--pos] = 0;
    if (pos == 0) return false;
    ++idx[pos - 1];
  }
}

}  // namespace

TEST(PatchDistortion, ExactLattice) {
  const auto pts = unit_lattice();
  const auto fit = apavoid::patch_distortion(pts, plane, 3);
  EXPECT_LT(fit.epsilon, 1e-12);
  EXPECT_NEAR(apavoid::to_double(fit.spec.delta), 1, 1e-9);
  EXPECT_NEAR(apavoid::to_double(fit.spec.anchor[0]), 0, 1e-9);
  EXPECT_NEAR(apavoid::to_double(fit.spec.anchor[1]), 0, 1e-9);

  const auto exact = apavoid::patch_distortion(pts, plane, 3, PatchMetric::chebyshev);
  EXPECT_EQ(*exact.exact_epsilon, 0);
  EXPECT_EQ(exact.spec.delta, 1);
  EXPECT_EQ(exact.spec.anchor, (PointD{0, 0}));
}

TEST(PatchDistortion, LineReduction) {
  const Orientation line = Orientation::axes(1, {0});
  const std::vector<PointD> pts{{0}, {1}, {3}};
  EXPECT_NEAR(apavoid::patch_distortion(pts, line, 3).epsilon, 1.0 / 6, 1e-9);
  EXPECT_EQ(*apavoid::patch_distortion(pts, line, 3, PatchMetric::chebyshev).exact_epsilon, Rational(1, 6));
}

TEST(PatchDistortion, ShiftedLatticeMatchesIndependentValues) {
  // Reference values from an independent second-order cone solve.
  auto pts = unit_lattice();
  pts[4][0] += Rational(1, 20);
  EXPECT_NEAR(apavoid::patch_distortion(pts, plane, 3).epsilon, 0.025, 1e-9);
  pts = unit_lattice();
  pts[7][0] += Rational(1, 20);
  EXPECT_NEAR(apavoid::patch_distortion(pts, plane, 3).epsilon, 0.024984394500784, 1e-9);
  EXPECT_NEAR(oracle::brute_patch_distortion(planar(pts), planar(apavoid::site_offsets(plane, 3))), 0.024984394500784, 1e-9);
}

TEST(PatchDistortion, AgreesWithBruteForceCircles) {
  std::mt19937_64 rng(21);
  const auto offsets = planar(apavoid::site_offsets(plane, 3));
  for (int trial = 0; trial < 40; ++trial) {
    auto pts = unit_lattice();
    for (auto& p : pts)
      for (auto& c : p) c += oracle::random_rational(rng, -8, 8, 100);
    const auto fit = apavoid::patch_distortion(pts, plane, 3);
    EXPECT_NEAR(fit.epsilon, oracle::brute_patch_distortion(planar(pts), offsets), 1e-9);
    // The reported (t, Delta) attains the reported value.
    const double delta = apavoid::to_double(fit.spec.delta);
    double worst = 0;
    const auto y = planar(pts);
    for (std::size_t i = 0; i < y.size(); ++i)
      worst = std::max(worst, std::hypot(y[i][0] - apavoid::to_double(fit.spec.anchor[0]) - delta * offsets[i][0],
                                         y[i][1] - apavoid::to_double(fit.spec.anchor[1]) - delta * offsets[i][1]) / delta);
    EXPECT_NEAR(worst, fit.epsilon, 1e-10);
  }
}

TEST(PatchDistortion, TranslationAndScaleInvariance) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PointD> pts;
    for (int i = 0; i < 3; ++i)
      pts.push_back({oracle::random_rational(rng, -50, 50, 10), oracle::random_rational(rng, -50, 50, 10)});
    const Orientation e = Orientation::normalized(2, {{Rational(1), oracle::random_rational(rng, -9, 9, 4)}});
    const auto base = apavoid::patch_distortion(pts, e, 3);
    const Rational shift0 = oracle::random_rational(rng, -1000, 1000, 3), shift1 = oracle::random_rational(rng, -1000, 1000, 3);
    const Rational scale = oracle::random_rational(rng, 1, 50, 7);
    auto moved = pts, scaled = pts;
    for (auto& p : moved) {
      p[0] += shift0;
      p[1] += shift1;
    }
    for (auto& p : scaled)
      for (auto& c : p) c *= scale;
    EXPECT_NEAR(apavoid::patch_distortion(moved, e, 3).epsilon, base.epsilon, 1e-9);
    const auto big = apavoid::patch_distortion(scaled, e, 3);
    EXPECT_NEAR(big.epsilon, base.epsilon, 1e-9);
    if (base.epsilon < 0.4) EXPECT_NEAR(apavoid::to_double(big.spec.delta / base.spec.delta), apavoid::to_double(scale), 1e-6);
  }
}

TEST(PatchDistortion, OneDimensionalAgreement) {
  std::mt19937_64 rng(8);
  const Orientation line = Orientation::axes(1, {0});
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 3 + static_cast<int>(rng() % 3);
    std::vector<Rational> b;
    for (int i = 0; i < k; ++i) b.push_back(oracle::random_rational(rng, -100, 100, 1 + static_cast<long>(rng() % 9)));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (static_cast<int>(b.size()) != k) continue;
    std::vector<PointD> pts;
    for (const auto& x : b) pts.push_back({x});
    const Rational star = apavoid::minimax_distortion(b).epsilon_star;
    EXPECT_EQ(*apavoid::patch_distortion(pts, line, k, PatchMetric::chebyshev).exact_epsilon, star);
    EXPECT_NEAR(apavoid::patch_distortion(pts, line, k).epsilon, apavoid::to_double(star), 1e-9);
  }
}

TEST(PatchDistortion, Errors) {
  EXPECT_THROW(apavoid::patch_distortion({}, plane, 3), apavoid::domain_error);
  EXPECT_THROW(apavoid::patch_distortion(unit_lattice(), e1, 3), apavoid::domain_error);
  EXPECT_THROW(Orientation(2, {{Rational(1), Rational(1)}}), apavoid::domain_error);
  EXPECT_THROW(Orientation(2, {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1)}}), apavoid::domain_error);
}

TEST(ContainsPatch, Examples) {
  const auto grid = integer_grid(5);
  const auto row = apavoid::contains_patch(grid, 3, Rational(1, 100), e1);
  ASSERT_TRUE(row.has_value());
  EXPECT_EQ(row->matching, (std::vector<std::size_t>{0, 5, 10}));
  EXPECT_NEAR(apavoid::to_double(row->spec.delta), 1, 1e-9);
  EXPECT_NEAR(apavoid::to_double(row->spec.anchor[0]), 0, 1e-9);
  EXPECT_NEAR(apavoid::to_double(row->spec.anchor[1]), 0, 1e-9);

  const auto diagonal = Orientation::normalized(2, {{Rational(1), Rational(1)}});
  const auto diag = apavoid::contains_patch(grid, 3, 0, diagonal);
  ASSERT_TRUE(diag.has_value());
  EXPECT_EQ(diag->matching, (std::vector<std::size_t>{0, 6, 12}));
  EXPECT_NEAR(apavoid::to_double(diag->spec.delta), std::sqrt(2.0), 1e-9);

  EXPECT_FALSE(apavoid::contains_patch(cantor_square(4), 3, Rational(1, 10), e1).has_value());
}

TEST(ContainsPatch, AgreesWithAllAssignments) {
  std::mt19937_64 rng(13);
  int found = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<PointD> pts;
    for (int i = 0; i < 6; ++i) pts.push_back({oracle::random_rational(rng, 0, 40, 10), oracle::random_rational(rng, 0, 40, 10)});
    const PointSetD f(2, pts);
    const Rational eps(1 + static_cast<long>(rng() % 30), 100);
    const auto dir = Orientation::normalized(2, {{Rational(1), oracle::random_rational(rng, -4, 4, 3)}});
    const bool fast = apavoid::contains_patch(f, 3, eps, dir).has_value();
    EXPECT_EQ(fast, brute_line_patch(f, 3, eps, dir)) << "trial " << trial;
    found += fast;
  }
  EXPECT_GT(found, 0);
  EXPECT_LT(found, 40);
}

TEST(ContainsPatch, LineCaseMatchesIndexwiseSearch) {
  // Below eps = 1/2 the reuse-permitting definition coincides with the ordered one.
  std::mt19937_64 rng(17);
  const Orientation line = Orientation::axes(1, {0});
  for (int trial = 0; trial < 200; ++trial) {
    const auto values = random_line(rng, 3 + static_cast<int>(rng() % 8), 60);
    std::vector<PointD> pts;
    for (const auto& v : values) pts.push_back({v});
    const Rational eps(static_cast<long>(rng() % 49), 100);
    const int k = 3 + static_cast<int>(rng() % 2);
    const bool patch = apavoid::contains_patch(PointSetD(1, pts), k, eps, line).has_value();
    const bool ap = apavoid::contains_almost_ap(apavoid::PointSet1D(values), k, eps).has_value();
    EXPECT_EQ(patch, ap) << "trial " << trial;
  }
}

TEST(ContainsPatch, ProjectionSoundness) {
  std::mt19937_64 rng(19);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const apavoid::PointSet1D a(random_line(rng, 4 + static_cast<int>(rng() % 3), 3000)), b(random_line(rng, 4, 100));
    if (apavoid::contains_almost_ap(a, 3, Rational(1, 10))) continue;
    ++checked;
    EXPECT_FALSE(apavoid::contains_patch(PointSetD::product(a, b), 3, Rational(1, 10), e1).has_value());
  }
  EXPECT_GT(checked, 5);
}

TEST(ContainsPatch, MonotoneInEpsilon) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PointD> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({oracle::random_rational(rng, 0, 30, 5), oracle::random_rational(rng, 0, 30, 5)});
    const PointSetD f(2, pts);
    const auto w = apavoid::contains_patch(f, 3, Rational(1, 5), e1);
    if (!w) continue;
    for (const Rational larger : {Rational(1, 4), Rational(3, 10), Rational(7, 10)}) {
      std::vector<PointD> assigned;
      for (auto i : w->matching) assigned.push_back(f[i]);
      EXPECT_LE(apavoid::patch_distortion(assigned, e1, 3).epsilon, apavoid::to_double(larger) + 1e-9);
      EXPECT_TRUE(apavoid::contains_patch(f, 3, larger, e1).has_value());
    }
  }
}

TEST(ContainsPatch, TwoDimensionalOrientationAndLimits) {
  const auto grid = integer_grid(4);
  const auto w = apavoid::contains_patch(grid, 2, Rational(1, 100), plane);
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->matching.size(), 4u);
  EXPECT_LT(w->epsilon, 1e-9);
  EXPECT_THROW(apavoid::contains_patch(integer_grid(17), 2, Rational(1, 100), plane), apavoid::resource_error);
  EXPECT_THROW(apavoid::contains_patch(grid, 3, Rational(3, 4), e1), apavoid::domain_error);
  EXPECT_THROW(apavoid::contains_patch(grid, 1, Rational(1, 4), e1), apavoid::domain_error);
  EXPECT_THROW(apavoid::contains_patch(PointSetD(), 3, Rational(1, 4), e1), apavoid::domain_error);
}

TEST(ContainsPatch, PairsAreAlwaysPatchesAlongTheirDirection) {
  // k = 2: any two points p, q form a patch along (q - p) / |q - p|.
  const PointSetD f(2, {{Rational(0), Rational(0)}, {Rational(3), Rational(4)}});
  const auto dir = Orientation::normalized(2, {{Rational(3), Rational(4)}});
  const auto w = apavoid::contains_patch(f, 2, 0, dir);
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(apavoid::to_double(w->spec.delta), 5, 1e-9);
}

TEST(ContainsPatch, WorkerCountDoesNotChangeWitness) {
  std::mt19937_64 rng(29);
  std::vector<PointD> pts;
  for (int i = 0; i < 60; ++i) pts.push_back({oracle::random_rational(rng, 0, 100, 4), oracle::random_rational(rng, 0, 100, 4)});
  const PointSetD f(2, pts);
  const auto dir = Orientation::normalized(2, {{Rational(2), Rational(1)}});
  const auto one = apavoid::contains_patch(f, 3, Rational(1, 20), dir, {256, 1});
  for (unsigned t : {2u, 8u}) {
    const auto many = apavoid::contains_patch(f, 3, Rational(1, 20), dir, {256, t});
    ASSERT_EQ(one.has_value(), many.has_value());
    if (one) EXPECT_EQ(one->matching, many->matching);
  }
}

TEST(DeletionAudit, CountingExamples) {
  const auto grid = integer_grid(6, Rational(1, 6));
  const apavoid::Cube unit{{0, 0}, 1};
  const auto audit = apavoid::grid_deletion_audit(grid, unit, 3, Rational(2, 5), e1, 1);
  EXPECT_EQ(audit.q, 2);
  EXPECT_EQ(audit.cubes_per_side, 6u);
  EXPECT_EQ(audit.faces, 6u);
  EXPECT_EQ(audit.deletions_per_face, 2u);
  EXPECT_EQ(audit.per_parent_bound, 24u);
  EXPECT_EQ(audit.levels[0].observed, 36u);
  EXPECT_GT(audit.levels[0].fully_occupied_collections, 0u);
  EXPECT_FALSE(audit.within_bound());

  // d = 1: (k - 1) / (2 eps') subintervals survive.
  const PointSetD line(1, {{Rational(0)}});
  for (const Rational eps : {Rational(1, 10), Rational(1, 7), Rational(3, 10)}) {
    const auto a = apavoid::grid_deletion_audit(line, {{0}, 1}, 4, eps, Orientation::axes(1, {0}), 1);
    const apavoid::BigInt q = apavoid::half_inverse_ceiling(eps);
    EXPECT_EQ(Rational(static_cast<long>(a.per_parent_bound)), Rational(3) / (2 * apavoid::rounded_epsilon(eps)));
    EXPECT_EQ(a.q, q);
  }
}

TEST(DeletionAudit, PatchFreeSetsStayWithinBound) {
  const auto square = cantor_square(4);
  ASSERT_FALSE(apavoid::contains_patch(square, 3, Rational(1, 10), e1).has_value());
  const auto audit = apavoid::grid_deletion_audit(square, {{0, 0}, 1}, 3, Rational(1, 10), e1, 3);
  ASSERT_EQ(audit.levels.size(), 3u);
  for (const auto& l : audit.levels) {
    EXPECT_LE(l.observed, l.bound);
    EXPECT_EQ(l.fully_occupied_collections, 0u);
  }
  EXPECT_TRUE(audit.within_bound());
}

TEST(DeletionAudit, FullCollectionsImplyPatches) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PointD> pts;
    const int n = 10 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) pts.push_back({oracle::random_rational(rng, 0, 60, 60), oracle::random_rational(rng, 0, 60, 60)});
    const PointSetD f(2, pts);
    const Rational eps(2, 5);
    const auto audit = apavoid::grid_deletion_audit(f, {{0, 0}, 1}, 3, eps, e1, 2);
    const bool patch = apavoid::contains_patch(f, 3, eps, e1).has_value();
    bool full = false;
    for (const auto& l : audit.levels) full = full || l.fully_occupied_collections > 0;
    if (full) EXPECT_TRUE(patch);
    if (!patch) EXPECT_TRUE(audit.within_bound());
  }
}

TEST(DeletionAudit, Errors) {
  const auto grid = integer_grid(3);
  const auto diagonal = Orientation::normalized(2, {{Rational(1), Rational(1)}});
  EXPECT_THROW(apavoid::grid_deletion_audit(grid, {{0, 0}, 1}, 3, Rational(1, 4), diagonal, 1), apavoid::domain_error);
  EXPECT_THROW(apavoid::grid_deletion_audit(grid, {{10, 10}, 1}, 3, Rational(1, 4), e1, 1), apavoid::domain_error);
  EXPECT_THROW(apavoid::grid_deletion_audit(grid, {{0, 0}, 1}, 3, Rational(3, 4), e1, 1), apavoid::domain_error);
}

TEST(DirectionSweep, Examples) {
  const auto dirs = apavoid::equally_spaced_directions(32);
  std::vector<Orientation> vs;
  std::vector<apavoid::Real> angles;
  for (const auto& [a, o] : dirs) {
    angles.push_back(a);
    vs.push_back(o);
  }
  const auto grid = integer_grid(10, Rational(1, 9));
  const auto full = apavoid::direction_sweep(grid, 3, Rational(1, 5), vs, {256, 4}, angles);
  EXPECT_EQ(full.with_witness, 32u);

  std::mt19937_64 rng(37);
  std::vector<PointD> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({oracle::random_rational(rng, 0, 1000, 1000), oracle::random_rational(rng, 0, 1000, 1000)});
  std::vector<Orientation> eight;
  for (int j = 0; j < 32; j += 4) eight.push_back(vs[static_cast<std::size_t>(j)]);
  const auto sparse = apavoid::direction_sweep(PointSetD(2, pts), 4, Rational(1, 10), eight);
  EXPECT_EQ(sparse.without_witness, 8u);

  const auto square = cantor_square(3);
  const auto axes = apavoid::direction_sweep(square, 3, Rational(1, 10), {e1, Orientation::axes(2, {1})});
  EXPECT_EQ(axes.without_witness, 2u);
  EXPECT_THROW(apavoid::direction_sweep(square, 3, Rational(1, 10), {plane}), apavoid::domain_error);
}

TEST(DirectionSweep, LargeProbeExponentComesWithWitnesses) {
  const auto grid = integer_grid(10, Rational(1, 9));
  const std::vector<apavoid::AssouadSampleD> samples{{{Rational(1, 2), Rational(1, 2)}, Rational(1, 2), Rational(1, 9)}};
  const auto probe = apavoid::assouad_probe(grid, std::span<const apavoid::AssouadSampleD>(samples));
  ASSERT_TRUE(probe.max_exponent.has_value());
  const double bound = static_cast<double>(apavoid::thm4_upper_bound(2, 1, 3, Rational(1, 5)).value);
  EXPECT_GT(*probe.max_exponent, bound);
  std::vector<Orientation> vs;
  for (const auto& [a, o] : apavoid::equally_spaced_directions(16)) vs.push_back(o);
  EXPECT_GT(apavoid::direction_sweep(grid, 3, Rational(1, 5), vs).with_witness, 0u);
}
