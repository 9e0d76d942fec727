#include <gtest/gtest.h>

#include <random>

#include "coff/alignment.hpp"
#include "helpers.hpp"

namespace coff {
namespace {

using testing::pick;
using testing::random_map;

FeatureMap default_map(std::mt19937_64& rng, std::size_t channels, Pose2D pose) {
  const GridSpec spec;
  return FeatureMap(spec, channels, pose,
                    oracle::random_values(rng, channels * spec.cell_count(), 0.3));
}

TEST(Align, IdentityPose) {
  std::mt19937_64 rng(1);
  const FeatureMap m = default_map(rng, 2, {});
  const AlignedPair p = align(m, m);
  EXPECT_EQ(p.overlap.area_overlap, p.overlap.area_total);
  EXPECT_EQ(p.overlap.width, 176U);
  EXPECT_EQ(p.overlap.height, 200U);
  for (auto v : p.overlap.mask) ASSERT_EQ(v, 1);
  EXPECT_EQ(p.sender_resampled, m);
}

TEST(Align, HalfShiftAlongX) {
  std::mt19937_64 rng(2);
  const FeatureMap rx = default_map(rng, 2, {});
  const FeatureMap tx = default_map(rng, 2, {35.2, 0.0, 0.0});
  const AlignedPair p = align(rx, tx);

  // Brute force: receiver cell centers that fall inside the sender footprint.
  const GridSpec spec;
  std::size_t count = 0;
  for (std::size_t r = 0; r < spec.cells_y(); ++r) {
    for (std::size_t c = 0; c < spec.cells_x(); ++c) {
      const double x = (static_cast<double>(c) + 0.5) * 0.4 - 35.2;
      if (x >= 0.0 && x <= 70.4) ++count;
    }
  }
  EXPECT_EQ(p.overlap.area_overlap, count);
  EXPECT_DOUBLE_EQ(p.overlap.ratio(), 0.5);
  EXPECT_EQ(p.overlap.width, 88U);
  EXPECT_EQ(p.overlap.height, 200U);

  for (std::size_t ch = 0; ch < 2; ++ch) {
    for (std::size_t r = 0; r < 200; r += 7) {
      for (std::size_t c = 88; c < 176; ++c) {
        ASSERT_EQ(p.sender_resampled.at(ch, r, c), tx.at(ch, r, c - 88));
      }
      ASSERT_EQ(p.sender_resampled.at(ch, r, 10), 0.0F);
    }
  }
}

TEST(Align, DisjointFootprints) {
  std::mt19937_64 rng(3);
  const FeatureMap rx = default_map(rng, 1, {});
  const FeatureMap tx = default_map(rng, 1, {200.0, 0.0, 0.0});
  const AlignedPair p = align(rx, tx);
  EXPECT_EQ(p.overlap.area_overlap, 0U);
  EXPECT_EQ(p.overlap.width, 0U);
  const SplitRegions s = split_regions(p);
  EXPECT_TRUE(s.receiver_overlap.empty());
  EXPECT_TRUE(s.sender_overlap.empty());
  EXPECT_EQ(s.receiver_only.size(), p.overlap.area_total);
}

TEST(Align, ChannelMismatchThrows) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(align(random_map(rng, 2, 3, 3), random_map(rng, 3, 3, 3)), std::invalid_argument);
}

TEST(Align, QuarterTurnIsExactOnSquareGrid) {
  // A 4x4 sender rotated by +90 degrees about the receiver's grid center.
  std::mt19937_64 rng(5);
  const FeatureMap rx = random_map(rng, 1, 4, 4);
  const FeatureMap tx = random_map(rng, 1, 4, 4, Pose2D(4.0, 0.0, 3.14159265358979323846 / 2));
  const AlignedPair p = align(rx, tx);
  EXPECT_EQ(p.overlap.area_overlap, 16U);
  // Receiver (x, y) sits at sender-local (y, 4 - x).
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(p.sender_resampled.at(0, r, c), tx.at(0, 3 - c, r));
    }
  }
}

TEST(SplitRegions, FullOverlapLeavesNoReceiverOnlyCells) {
  std::mt19937_64 rng(6);
  const FeatureMap m = random_map(rng, 3, 5, 4);
  const SplitRegions s = split_regions(align(m, m));
  EXPECT_TRUE(s.receiver_only.empty());
  EXPECT_EQ(s.receiver_overlap.size(), 20U);
}

TEST(SplitRegions, PartitionProperty) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const std::size_t h = pick(rng, 1, 10);
    const std::size_t w = pick(rng, 1, 10);
    const double dx = static_cast<double>(pick(rng, 0, 2 * w)) - static_cast<double>(w);
    const double dy = static_cast<double>(pick(rng, 0, 2 * h)) - static_cast<double>(h);
    const FeatureMap rx = random_map(rng, 2, h, w);
    const FeatureMap tx = random_map(rng, 2, h, w, {dx, dy, 0.0});
    const AlignedPair p = align(rx, tx);
    const SplitRegions s = split_regions(p);
    ASSERT_EQ(s.receiver_overlap.cells, s.sender_overlap.cells);
    ASSERT_EQ(s.receiver_overlap.size() + s.receiver_only.size(), h * w);
    std::vector<int> seen(h * w, 0);
    for (auto c : s.receiver_overlap.cells) seen[c] += 1;
    for (auto c : s.receiver_only.cells) seen[c] += 2;
    for (std::size_t k = 0; k < h * w; ++k) {
      ASSERT_TRUE(seen[k] == 1 || seen[k] == 2);
      ASSERT_EQ(seen[k] == 1, p.overlap.mask[k] == 1);
    }
  }
}

TEST(Align, SymmetricOverlapAreaUnderTranslation) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const std::size_t h = pick(rng, 1, 12);
    const std::size_t w = pick(rng, 1, 12);
    const Pose2D a(testing::uniform(rng, -20, 20), testing::uniform(rng, -20, 20), 0.0);
    const Pose2D b(a.x() + static_cast<double>(pick(rng, 0, 2 * w)) - static_cast<double>(w),
                   a.y() + static_cast<double>(pick(rng, 0, 2 * h)) - static_cast<double>(h), 0.0);
    const FeatureMap ma = random_map(rng, 1, h, w, a);
    const FeatureMap mb = random_map(rng, 1, h, w, b);
    ASSERT_EQ(align(ma, mb).overlap.area_overlap, align(mb, ma).overlap.area_overlap);
  }
}

TEST(GatherScatter, RoundTrip) {
  std::mt19937_64 rng(10);
  const FeatureMap m = random_map(rng, 3, 4, 5);
  const Region r = gather(m, {0, 7, 19});
  EXPECT_EQ(r.at(2, 1), m.at(2, 1, 2));
  FeatureMap blank(m.spec(), 3, {});
  scatter(r, blank);
  EXPECT_EQ(blank.at(1, 3, 4), m.at(1, 3, 4));
  EXPECT_EQ(blank.at(1, 0, 1), 0.0F);
}

}  // namespace
}  // namespace coff
