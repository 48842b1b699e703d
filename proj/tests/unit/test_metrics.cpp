#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "oracle.hpp"
#include "sce/metrics.hpp"
#include "support.hpp"

using namespace sce;
using sce::test::random_bits;
using sce::test::row_bits;

namespace {

ClusterMask cm(const std::vector<int>& v, int run, int cluster) { return ClusterMask(row_bits(v), {run, cluster}); }

}  // namespace

TEST(Metrics, ScalarExamples) {
  const OverlapCounts c{1, 3, 4};
  EXPECT_DOUBLE_EQ(signal_strength(c), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(union_quality(c), 0.5);
  EXPECT_DOUBLE_EQ(dice(c), 0.5);

  const OverlapCounts same{7, 7, 14};
  EXPECT_EQ(signal_strength(same), 1.0);
  EXPECT_EQ(union_quality(same), 0.0);
  EXPECT_EQ(dice(same), 1.0);

  const OverlapCounts apart{0, 9, 9};
  EXPECT_EQ(signal_strength(apart), 0.0);
  EXPECT_EQ(union_quality(apart), 1.0);
  EXPECT_EQ(dice(apart), 0.0);

  EXPECT_THROW(signal_strength(OverlapCounts{0, 0, 0}), Error);
}

TEST(Metrics, RatioClamping) {
  EXPECT_DOUBLE_EQ(pair_ratio(OverlapCounts{1, 3, 4}), 2.0 / 3.0);
  EXPECT_EQ(pair_ratio(OverlapCounts{5, 5, 10}), 1e6);
  EXPECT_EQ(pair_ratio(OverlapCounts{5, 5, 10}, {1e-3, 1e9}), 1e3);
  EXPECT_EQ(pair_ratio(OverlapCounts{5, 5, 10}, {1e-9, 50.0}), 50.0);
  EXPECT_EQ(pair_ratio(OverlapCounts{0, 5, 5}), 0.0);
}

TEST(Metrics, AlgebraicIdentitiesAndSymmetry) {
  CounterRng rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const int w = 1 + int(rng.below(64)), h = 1 + int(rng.below(16));
    const auto a = random_bits(rng, w, h);
    const auto b = random_bits(rng, w, h);
    const auto ab = score_pair(overlap_counts(a, b));
    const auto ba = score_pair(overlap_counts(b, a));
    EXPECT_NEAR(ab.dice, 1.0 - ab.q_u, 1e-12);
    EXPECT_NEAR(ab.q_u, (1.0 - ab.s_i) / (1.0 + ab.s_i), 1e-12);
    EXPECT_EQ(ab.s_i, ba.s_i);
    EXPECT_EQ(ab.q_u, ba.q_u);
    EXPECT_EQ(ab.dice, ba.dice);
    const auto o = oracle::scores(a, b, {});
    EXPECT_NEAR(ab.s_i, o.s_i, 1e-15);
    EXPECT_NEAR(ab.q_u, o.q_u, 1e-15);
    EXPECT_NEAR(ab.dice, o.dice, 1e-15);
  }
}

// Exhaustive over all pairs of 1x8 masks (and all single-pixel additions).
TEST(Metrics, MonotonicityOnEightPixelMasks) {
  auto s_of = [](unsigned a, unsigned b) {
    const unsigned u = a | b, i = a & b;
    return u == 0 ? -1.0 : signal_strength(OverlapCounts{std::uint64_t(std::popcount(i)), std::uint64_t(std::popcount(u)),
                                                         std::uint64_t(std::popcount(i) + std::popcount(u))});
  };
  for (unsigned a = 1; a < 256; ++a)
    for (unsigned b = 1; b < 256; ++b) {
      const double s = s_of(a, b);
      for (unsigned bit = 0; bit < 8; ++bit) {
        const unsigned px = 1u << bit;
        EXPECT_GE(s_of(a | px, b | px), s);
        if (!(b & px)) EXPECT_LE(s_of(a | px, b), s);
        if (!(a & px)) EXPECT_LE(s_of(a, b | px), s);
      }
    }
}

TEST(GMatrix, Examples) {
  const auto a = cm({1, 1, 0, 0}, 0, 0);
  const auto b = cm({0, 1, 1, 0}, 1, 0);
  const auto g = g_matrix(a, b);
  EXPECT_DOUBLE_EQ(g(0, 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(g(0, 1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(g(0, 2), 2.0 / 3.0);
  EXPECT_EQ(g(0, 3), 0.0);

  EXPECT_TRUE((g_matrix(a, cm({0, 0, 1, 1}, 1, 1)).array() == 0.0).all());
  const auto same = g_matrix(a, cm({1, 1, 0, 0}, 1, 2));
  EXPECT_EQ(same(0, 0), 1e6);
  EXPECT_EQ(same(0, 2), 0.0);
  EXPECT_THROW(g_matrix(a, cm({0, 1, 1, 0}, 0, 1)), Error);
}

TEST(GSum, ToyEnsembleSumsToFour) {
  const auto base = cm({1, 1, 0, 0}, 0, 0);
  const std::vector<ClusterMask> others{cm({0, 1, 1, 0}, 1, 0), cm({1, 1, 1, 0}, 2, 0)};
  const auto g = g_sum_matrix(base, others);
  EXPECT_NEAR(g.g_scalar, 4.0, 1e-12);
  EXPECT_NEAR(g_sum_scalar(base, others), 4.0, 1e-12);
  EXPECT_EQ(g.comparisons, 2u);
  // (1/3)/(1/2) on {0,1,2} plus (2/3)/(1/5) on {0,1,2}
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(g.g_map(0, x), 4.0, 1e-12);
  EXPECT_EQ(g.g_map(0, 3), 0.0);
}

TEST(GSum, SingleComparisonAndDisjoint) {
  const auto base = cm({1, 1, 0, 0, 1}, 0, 0);
  const std::vector<ClusterMask> one{cm({0, 1, 1, 0, 1}, 1, 0)};
  EXPECT_EQ(g_sum_matrix(base, one).g_map, g_matrix(base, one[0]));

  const std::vector<ClusterMask> apart{cm({0, 0, 1, 1, 0}, 1, 0), cm({0, 0, 0, 1, 0}, 2, 4)};
  const auto g = g_sum_matrix(base, apart);
  EXPECT_EQ(g.g_scalar, 0.0);
  EXPECT_TRUE((g.g_map.array() == 0.0).all());

  EXPECT_THROW(g_sum_matrix(base, std::vector<ClusterMask>{}), Error);
  EXPECT_THROW(g_sum_matrix(base, std::vector<ClusterMask>{cm({0, 1, 0, 0, 0}, 0, 1)}), Error);
}

TEST(GSum, MatchesOracleAndIsOrderIndependent) {
  CounterRng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const int runs = 2 + int(rng.below(3));
    std::vector<ClusterMask> all;
    for (int r = 0; r < runs; ++r) {
      const int k = 1 + int(rng.below(4));
      for (int c = 0; c < k; ++c) all.emplace_back(random_bits(rng, 8, 8), MaskId{r, c});
    }
    const RatioOptions opt{trial % 3 ? 1e-6 : 1e-2, trial % 5 ? 1e6 : 30.0};
    for (const auto& base : all) {
      std::vector<ClusterMask> others;
      for (const auto& m : all)
        if (m.origin().run != base.origin().run) others.push_back(m);
      const auto got = g_sum_matrix(base, others, opt);
      const auto want = oracle::g_sum(base, all, opt);
      EXPECT_EQ(got.comparisons, want.comparisons);
      EXPECT_NEAR(got.g_scalar, want.scalar, 1e-9 * std::max(1.0, std::abs(want.scalar)));
      EXPECT_EQ(g_sum_scalar(base, others, opt), got.g_scalar);
      for (Eigen::Index p = 0; p < want.map.size(); ++p) {
        const double w = want.map(p / 8, p % 8);
        EXPECT_NEAR(got.g_map(p / 8, p % 8), w, 1e-9 * std::max(1.0, std::abs(w)));
      }
      EXPECT_TRUE(got.g_map.allFinite());
      EXPECT_GE(got.g_map.minCoeff(), 0.0);

      std::vector<ClusterMask> shuffled = others;
      for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
      const auto again = g_sum_matrix(base, shuffled, opt);
      EXPECT_EQ(again.g_scalar, got.g_scalar);
      EXPECT_EQ(again.g_map, got.g_map);
    }
  }
}

TEST(GSum, DisplayNormalization) {
  GMap g(1, 3);
  g << 0.0, 2.0, 8.0;
  const auto n = normalized_for_display(g);
  EXPECT_EQ(n(0, 2), 1.0);
  EXPECT_EQ(n(0, 1), 0.25);
  EXPECT_EQ(normalized_for_display(GMap::Zero(2, 2)), GMap::Zero(2, 2));
}
