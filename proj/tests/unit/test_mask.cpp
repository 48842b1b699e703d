#include <gtest/gtest.h>

#include "sce/mask.hpp"
#include "support.hpp"

using namespace sce;
using sce::test::random_bits;
using sce::test::row_bits;

namespace {

const BitMatrix A = row_bits({1, 1, 0, 0});
const BitMatrix B = row_bits({0, 1, 1, 0});

std::vector<int> dense(const BitMatrix& m) {
  std::vector<int> v;
  for (std::size_t p = 0; p < m.size(); ++p) v.push_back(m.test(p));
  return v;
}

Labeling labeling_of(int w, int h, std::vector<int> labels, int k) {
  Labeling l;
  l.width = w;
  l.height = h;
  l.labels = std::move(labels);
  l.n_clusters = k;
  return l;
}

}  // namespace

TEST(BitMatrix, BasicsAcrossWordBoundaries) {
  BitMatrix m(70, 3);
  EXPECT_EQ(m.size(), 210u);
  EXPECT_FALSE(m.any());
  for (std::size_t p : {0u, 63u, 64u, 127u, 209u}) m.set(p);
  EXPECT_EQ(m.popcount(), 5u);
  EXPECT_TRUE(m(0, 63));
  EXPECT_TRUE(m(2, 69));
  m.set(63, false);
  EXPECT_EQ(m.popcount(), 4u);
  EXPECT_THROW(BitMatrix(0, 4), Error);
  EXPECT_EQ(BitMatrix::from_dense(m.to_dense()), m);
}

TEST(MasksFromLabeling, Examples) {
  const auto set = masks_from_labeling(labeling_of(4, 1, {0, 0, 1, 1}, 2), 3);
  ASSERT_EQ(set.masks.size(), 2u);
  EXPECT_EQ(dense(set.masks[0].bits()), (std::vector<int>{1, 1, 0, 0}));
  EXPECT_EQ(dense(set.masks[1].bits()), (std::vector<int>{0, 0, 1, 1}));
  EXPECT_EQ(set.masks[1].origin(), (MaskId{3, 1}));

  const auto one = masks_from_labeling(labeling_of(3, 2, std::vector<int>(6, 0), 1));
  ASSERT_EQ(one.masks.size(), 1u);
  EXPECT_EQ(one.masks[0].bits().popcount(), 6u);
}

TEST(MasksFromLabeling, PartitionProperty) {
  CounterRng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int w = 1 + int(rng.below(90)), h = 1 + int(rng.below(20)), k = 1 + int(rng.below(6));
    std::vector<int> labels(std::size_t(w) * h);
    for (auto& l : labels) l = int(rng.below(std::uint64_t(k)));
    const auto set = masks_from_labeling(labeling_of(w, h, labels, k));
    std::size_t total = 0;
    for (const auto& m : set.masks) total += m.bits().popcount();
    EXPECT_EQ(total, std::size_t(w) * h);
    EXPECT_TRUE(set.is_partition());
  }
}

TEST(ClusterMask, RejectsEmpty) {
  EXPECT_THROW(ClusterMask(BitMatrix(3, 3), MaskId{0, 0}), Error);
}

TEST(MaskOps, Examples) {
  EXPECT_EQ(dense(mask_union(A, B)), (std::vector<int>{1, 1, 1, 0}));
  EXPECT_EQ(dense(mask_intersection(A, B)), (std::vector<int>{0, 1, 0, 0}));
  const auto r = mask_sum(A, B);
  EXPECT_EQ(r(0, 0), 1);
  EXPECT_EQ(r(0, 1), 2);
  EXPECT_EQ(r(0, 2), 1);
  EXPECT_EQ(r(0, 3), 0);
  const auto c = overlap_counts(A, B);
  EXPECT_EQ(c.i_sum, 1u);
  EXPECT_EQ(c.u_sum, 3u);
  EXPECT_EQ(c.r_sum, 4u);

  EXPECT_EQ(mask_union(A, A), A);
  EXPECT_EQ(mask_intersection(A, A), A);
  const auto twice = mask_sum(A, A);
  for (int x = 0; x < 4; ++x) EXPECT_EQ(twice(0, x), 2 * A(0, x));
  const auto disjoint = row_bits({0, 0, 1, 1});
  EXPECT_EQ(mask_union(A, disjoint).popcount(), 4u);
  EXPECT_FALSE(mask_intersection(A, disjoint).any());
  EXPECT_THROW(mask_union(A, BitMatrix(2, 2)), Error);
}

TEST(MaskOps, CountsForIdenticalAndDisjoint) {
  CounterRng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + int(rng.below(100)), h = 1 + int(rng.below(10));
    const auto a = random_bits(rng, w, h);
    const std::size_t p = a.popcount();
    const auto same = overlap_counts(a, a);
    EXPECT_EQ(same.i_sum, p);
    EXPECT_EQ(same.u_sum, p);
    EXPECT_EQ(same.r_sum, 2 * p);

    BitMatrix comp(w, h);
    for (std::size_t k = 0; k < a.size(); ++k) comp.set(k, !a.test(k) && rng.uniform() < 0.5);
    const auto d = overlap_counts(a, comp);
    EXPECT_EQ(d.i_sum, 0u);
    EXPECT_EQ(d.u_sum, p + comp.popcount());
    EXPECT_EQ(d.r_sum, p + comp.popcount());
  }
}

// Materialized union / intersection / sum against the fused counter.
TEST(MaskOps, FusedCountsMatchMaterializedMatrices) {
  CounterRng rng(23);
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = 1 + int(rng.below(130)), h = 1 + int(rng.below(12));
    const auto a = random_bits(rng, w, h, false);
    const auto b = random_bits(rng, w, h, false);
    std::uint64_t i = 0, u = 0, r = 0;
    const auto sum = mask_sum(a, b);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        i += a(y, x) && b(y, x);
        u += a(y, x) || b(y, x);
        r += sum(y, x);
      }
    const auto c = overlap_counts(a, b);
    ASSERT_EQ(c.i_sum, i);
    ASSERT_EQ(c.u_sum, u);
    ASSERT_EQ(c.r_sum, r);
    ASSERT_EQ(c.r_sum, c.u_sum + c.i_sum);
    ASSERT_EQ(r, a.popcount() + b.popcount());
    EXPECT_EQ(mask_union(a, b), mask_union(b, a));
    EXPECT_EQ(mask_intersection(a, b), mask_intersection(b, a));
    EXPECT_EQ(mask_sum(a, b), mask_sum(b, a));
    EXPECT_EQ(mask_union(a, b).popcount(), u);
    EXPECT_EQ(mask_intersection(a, b).popcount(), i);
  }
}

TEST(MaskIo, Msk1RoundTripAndLayout) {
  sce::test::TempDir dir("mask");
  const auto m = sce::test::bits_from({1, 0, 1, 1, 0, 0, 0, 0, 1, 1}, 5, 2);
  save_mask(m, dir / "m.msk");
  const auto bytes = sce::test::slurp(dir / "m.msk");
  ASSERT_EQ(bytes.size(), 12u + 2u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MSK1");
  EXPECT_EQ(bytes[4], 5);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 0b10110000);
  EXPECT_EQ(bytes[13], 0b11000000);
  EXPECT_EQ(load_mask(dir / "m.msk"), m);

  CounterRng rng(24);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = random_bits(rng, 1 + int(rng.below(200)), 1 + int(rng.below(30)), false);
    save_mask(r, dir / "r.msk");
    EXPECT_EQ(load_mask(dir / "r.msk"), r);
  }

  auto bad = bytes;
  bad[0] = 'Z';
  sce::test::spit(dir / "bad.msk", bad);
  EXPECT_THROW(load_mask(dir / "bad.msk"), Error);
  auto shrt = bytes;
  shrt.pop_back();
  sce::test::spit(dir / "short.msk", shrt);
  EXPECT_THROW(load_mask(dir / "short.msk"), Error);
}

TEST(MaskIo, PbmRowsArePadded) {
  sce::test::TempDir dir("pbm");
  const auto m = sce::test::bits_from({1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0}, 9, 2);
  save_pbm(m, dir / "m.pbm");
  const auto bytes = sce::test::slurp(dir / "m.pbm");
  const std::string header = "P4\n9 2\n";
  ASSERT_EQ(bytes.size(), header.size() + 4);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + long(header.size())), header);
  EXPECT_EQ(bytes[header.size() + 0], 0x80);
  EXPECT_EQ(bytes[header.size() + 1], 0x80);
  EXPECT_EQ(bytes[header.size() + 2], 0x40);
  EXPECT_EQ(bytes[header.size() + 3], 0x00);
}
