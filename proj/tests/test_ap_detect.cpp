#include <gtest/gtest.h>

#include <random>

#include "apavoid/ap_detect.hpp"
#include "oracles.hpp"

using apavoid::APWitness;
using apavoid::PointSet1D;
using apavoid::Rational;

namespace {

std::vector<Rational> R(std::initializer_list<Rational> xs) { return std::vector<Rational>(xs); }

std::vector<double> to_doubles(const std::vector<Rational>& b) {
  std::vector<double> out;
  for (const auto& x : b) out.push_back(apavoid::to_double(x));
  return out;
}

std::vector<Rational> random_increasing(std::mt19937_64& rng, int k, long den) {
  std::vector<Rational> b;
  Rational x = oracle::random_rational(rng, -50, 50, den);
  for (int i = 0; i < k; ++i) {
    b.push_back(x);
    x += oracle::random_rational(rng, 1, 60, den);
  }
  return b;
}

}  // namespace

TEST(MinimaxDistortion, ExactProgression) {
  const auto d = apavoid::minimax_distortion(R({0, 1, 2}));
  EXPECT_EQ(d.epsilon_star, 0);
  EXPECT_EQ(d.witness, (APWitness{0, 1, 3}));
}

TEST(MinimaxDistortion, EquioscillatingTriples) {
  const auto d = apavoid::minimax_distortion(R({0, 1, 3}));
  EXPECT_EQ(d.epsilon_star, Rational(1, 6));
  EXPECT_EQ(d.witness.a0, Rational(-1, 4));
  EXPECT_EQ(d.witness.gap, Rational(3, 2));

  const auto e = apavoid::minimax_distortion(R({0, 1, Rational(21, 10)}));
  EXPECT_EQ(e.epsilon_star, Rational(1, 42));
  EXPECT_EQ(e.witness.a0, Rational(-1, 40));
  EXPECT_EQ(e.witness.gap, Rational(21, 20));
}

TEST(MinimaxDistortion, AgreesWithGridOracle) {
  EXPECT_NEAR(oracle::grid_distortion(std::vector<double>{0, 1, 3}), 1.0 / 6, 1e-6);
  EXPECT_NEAR(oracle::grid_distortion(std::vector<double>{0, 1, 2.1}), 1.0 / 42, 1e-6);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = random_increasing(rng, 3 + trial % 3, 7);
    const double exact = apavoid::to_double(apavoid::minimax_distortion(b).epsilon_star);
    EXPECT_NEAR(oracle::grid_distortion(to_doubles(b)), exact, 1e-6);
  }
}

TEST(MinimaxDistortion, WitnessAttainsEpsilonStar) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = random_increasing(rng, 3 + trial % 5, 5);
    const auto d = apavoid::minimax_distortion(b);
    EXPECT_GT(d.witness.gap, 0);
    EXPECT_EQ(apavoid::detail::progression_error(b, d.witness), d.epsilon_star);
  }
}

TEST(MinimaxDistortion, GridNeverBeatsExactOptimum) {
  // Exact rational grid over (a0, gap): no grid point may do better than epsilon_star.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto b = random_increasing(rng, 4, 3);
    const auto d = apavoid::minimax_distortion(b);
    const Rational span = b.back() - b.front();
    for (int ia = 0; ia <= 40; ++ia) {
      for (int ig = 1; ig <= 40; ++ig) {
        const APWitness w{d.witness.a0 + span * Rational(ia - 20, 400), d.witness.gap * Rational(ig + 20, 40), 4};
        EXPECT_GE(apavoid::detail::progression_error(b, w), d.epsilon_star);
      }
    }
  }
}

TEST(MinimaxDistortion, Errors) {
  EXPECT_THROW(apavoid::minimax_distortion(R({0, 1})), apavoid::domain_error);
  EXPECT_THROW(apavoid::minimax_distortion(R({0, 2, 1})), apavoid::domain_error);
  EXPECT_THROW(apavoid::minimax_distortion(R({0, 1, 1})), apavoid::domain_error);
}

TEST(MinimaxDistortion, AffineAndReflectionInvariance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = random_increasing(rng, 3 + trial % 4, 11);
    const Rational base = apavoid::minimax_distortion(b).epsilon_star;
    const Rational alpha = oracle::random_rational(rng, 1, 50, 7);
    const Rational beta = oracle::random_rational(rng, -50, 50, 3);
    std::vector<Rational> moved, reflected;
    for (const auto& x : b) moved.push_back(alpha * x + beta);
    for (auto it = b.rbegin(); it != b.rend(); ++it) reflected.push_back(beta - *it);
    EXPECT_EQ(apavoid::minimax_distortion(moved).epsilon_star, base);
    EXPECT_EQ(apavoid::minimax_distortion(reflected).epsilon_star, base);
  }
}

TEST(IsAlmostAP, Examples) {
  const auto yes = apavoid::is_almost_ap(R({0, 1, 3}), Rational(1, 5));
  ASSERT_TRUE(yes.holds);
  EXPECT_EQ(*yes.witness, (APWitness{Rational(-1, 4), Rational(3, 2), 3}));
  EXPECT_FALSE(apavoid::is_almost_ap(R({0, 1, 3}), Rational(1, 10)).holds);
  EXPECT_TRUE(apavoid::is_almost_ap(R({5, 6, 7, 8}), 0).holds);
  EXPECT_THROW(apavoid::is_almost_ap(R({0, 1, 3}), -1), apavoid::domain_error);
}

TEST(IsAlmostAP, MonotoneInEpsilon) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = random_increasing(rng, 3 + trial % 3, 4);
    const Rational eps = oracle::random_rational(rng, 0, 100, 200);
    const Rational bigger = eps + oracle::random_rational(rng, 0, 100, 300);
    if (apavoid::is_almost_ap(b, eps).holds) EXPECT_TRUE(apavoid::is_almost_ap(b, bigger).holds);
  }
}

TEST(IsAlmostAP, PrefixOfLongerProgressionKeepsWitnessGap) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = random_increasing(rng, 4 + trial % 3, 3);
    const Rational eps = oracle::random_rational(rng, 0, 49, 100);
    const auto full = apavoid::is_almost_ap(b, eps);
    if (!full.holds) continue;
    const std::vector<Rational> prefix(b.begin(), b.end() - 1);
    EXPECT_TRUE(apavoid::is_almost_ap(prefix, eps).holds);
    APWitness same = *full.witness;
    same.k = static_cast<int>(prefix.size());
    EXPECT_LE(apavoid::detail::progression_error(prefix, same), eps);
  }
}

TEST(ContainsAlmostAP, Examples) {
  const PointSet1D f(R({0, 1, 3}));
  const auto m = apavoid::contains_almost_ap(f, 3, Rational(1, 5));
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(m->witness, (APWitness{Rational(-1, 4), Rational(3, 2), 3}));

  EXPECT_FALSE(apavoid::contains_almost_ap(PointSet1D(R({0, 1})), 3, Rational(1, 10)).has_value());
  EXPECT_FALSE(apavoid::contains_almost_ap(f, 3, Rational(1, 10)).has_value());
}

TEST(ContainsAlmostAP, ModeAndDomainErrors) {
  const PointSet1D f(R({0, 1, 3}));
  EXPECT_THROW(apavoid::contains_almost_ap(f, 3, Rational(1, 2)), apavoid::unsupported_mode);
  EXPECT_THROW(apavoid::contains_almost_ap(f, 2, Rational(1, 5)), apavoid::domain_error);
  EXPECT_THROW(apavoid::contains_almost_ap(f, 3, Rational(-1, 5)), apavoid::domain_error);
}

TEST(ContainsAlmostAP, AgreesWithNaiveEnumeration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Rational> raw;
    const int n = 3 + static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) raw.push_back(oracle::random_rational(rng, 0, 60, 1 + static_cast<long>(rng() % 3)));
    const PointSet1D f(raw);
    const int k = 3 + trial % 3;
    const Rational eps = oracle::random_rational(rng, 0, 49, 100);
    const auto fast = apavoid::contains_almost_ap(f, k, eps);
    const auto slow = oracle::naive_first_ap(f.points(), k, eps);
    ASSERT_EQ(fast.has_value(), slow.has_value());
    if (fast) EXPECT_EQ(fast->indices, *slow);
  }
}

TEST(ContainsAlmostAP, ThroughRequiredIndex) {
  const PointSet1D f(R({0, 1, 2, 10, 20}));
  const auto m = apavoid::find_almost_ap_through(f.points(), 4, 3, 0);
  ASSERT_TRUE(m.has_value());
  EXPECT_EQ(m->indices, (std::vector<std::size_t>{0, 3, 4}));
  EXPECT_FALSE(apavoid::find_almost_ap_through(PointSet1D(R({0, 1, 2, 7})).points(), 3, 3, 0).has_value());
  const auto mid = apavoid::find_almost_ap_through(f.points(), 1, 3, 0);
  ASSERT_TRUE(mid.has_value());
  EXPECT_EQ(mid->indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(ContainsAlmostAP, WorkerCountDoesNotChangeResult) {
  std::mt19937_64 rng(14);
  std::vector<Rational> raw;
  for (int i = 0; i < 40; ++i) raw.push_back(oracle::random_rational(rng, 0, 100000, 1));
  const PointSet1D f(raw);
  const auto one = apavoid::search_almost_ap(f, 4, Rational(1, 50), {1});
  for (unsigned threads : {2u, 8u}) {
    const auto many = apavoid::search_almost_ap(f, 4, Rational(1, 50), {threads});
    EXPECT_EQ(one.nodes, many.nodes);
    ASSERT_EQ(one.match.has_value(), many.match.has_value());
    if (one.match) EXPECT_EQ(one.match->indices, many.match->indices);
  }
}

TEST(LafontMcReynolds, Examples) {
  EXPECT_TRUE(apavoid::is_lm_almost_ap(R({0, 1, 2, 3}), Rational(1, 1000)));
  EXPECT_FALSE(apavoid::is_lm_almost_ap(R({0, 1, 3}), 1));
  EXPECT_TRUE(apavoid::is_lm_almost_ap(R({0, 1, 3}), Rational(3, 2)));
  EXPECT_THROW(apavoid::is_lm_almost_ap(R({0, 1, 1}), 1), apavoid::domain_error);
}

TEST(LafontMcReynolds, ConversionFromAlmostAP) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 3 + trial % 6;
    const Rational eps = oracle::random_rational(rng, 1, 449, 1000);
    const Rational gap = oracle::random_rational(rng, 1, 1000, 13);
    const Rational a0 = oracle::random_rational(rng, -1000, 1000, 17);
    std::vector<Rational> b;
    for (int i = 0; i < k; ++i) b.push_back(a0 + i * gap + eps * gap * oracle::random_rational(rng, -1000, 1000, 1000));
    ASSERT_TRUE(apavoid::is_almost_ap(b, eps).holds);
    const Rational lm_eps = 4 * eps / (1 - 2 * eps) + Rational(1, 1000);
    EXPECT_TRUE(apavoid::is_lm_almost_ap(b, lm_eps));
  }
}
