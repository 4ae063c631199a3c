#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "merge_oracle.hpp"
#include "noisecollage/collage.hpp"
#include "noisecollage/error.hpp"
#include "oracles.hpp"

namespace nc = noisecollage;
using nc::Mask;
using nc::Tensor;

TEST(Merge, NoObjectsReturnsGlobal) {
  std::mt19937_64 rng(41);
  const Tensor g = nc::testing::random_tensor(rng, {3, 4, 4});
  EXPECT_EQ(nc::merge_noises({}, {}, g, {0.1}), g);
}

TEST(Merge, SingleFullMask) {
  const Tensor obj({1, 2, 2}, 2.0), g({1, 2, 2}, -1.0);
  const Tensor out = nc::merge_noises({obj}, {Mask(2, 2, true)}, g, {0.1});
  for (double v : out.values()) EXPECT_DOUBLE_EQ(v, (2.0 - 0.1) / 1.1);
}

TEST(Merge, OverlapAveragesObjects) {
  Mask a(1, 3), b(1, 3);
  a.set(0, 0);
  a.set(1, 0);
  b.set(1, 0);
  b.set(2, 0);
  const Tensor out =
      nc::merge_noises({Tensor({1, 1, 3}, 1.0), Tensor({1, 1, 3}, 3.0)}, {a, b}, Tensor({1, 1, 3}, 0.0), {1.0});
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(out[2], 1.5);
}

TEST(Merge, MatchesScalarOracleAndIsConvex) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Tensor> objs;
    std::vector<Mask> masks;
    for (int n = 0; n < 3; ++n) {
      objs.push_back(nc::testing::random_tensor(rng, {2, 5, 6}));
      masks.push_back(nc::testing::random_mask(rng, 5, 6, 0.4));
    }
    const Tensor g = nc::testing::random_tensor(rng, {2, 5, 6});
    const double alpha = std::uniform_real_distribution<double>(0.01, 3.0)(rng);
    const Tensor out = nc::merge_noises(objs, masks, g, {alpha});
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
          ASSERT_EQ(out.at(c, y, x), nc::testing::merge_pixel_oracle(objs, masks, g, alpha, c, y, x));
          double lo = g.at(c, y, x), hi = lo;
          for (std::size_t n = 0; n < 3; ++n)
            if (masks[n].get(x, y)) {
              lo = std::min(lo, objs[n].at(c, y, x));
              hi = std::max(hi, objs[n].at(c, y, x));
            }
          ASSERT_GE(out.at(c, y, x), lo - 1e-15);
          ASSERT_LE(out.at(c, y, x), hi + 1e-15);
        }
  }
}

TEST(Merge, ZeroAlphaSingleOwnerIsExact) {
  Mask left(4, 4), right(4, 4);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) (x < 2 ? left : right).set(x, y);
  std::mt19937_64 rng(43);
  const Tensor a = nc::testing::random_tensor(rng, {1, 4, 4}), b = nc::testing::random_tensor(rng, {1, 4, 4});
  const Tensor out = nc::merge_noises({a, b}, {left, right}, Tensor({1, 4, 4}, 9.0), {0.0});
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(out.at(0, y, x), (x < 2 ? a : b).at(0, y, x));
}

TEST(Merge, OutsideAllMasksIsExactGlobal) {
  std::mt19937_64 rng(44);
  const Tensor g = nc::testing::random_tensor(rng, {3, 4, 4});
  Mask m(4, 4);
  m.set(0, 0);
  const Tensor out = nc::merge_noises({Tensor({3, 4, 4}, 5.0)}, {m}, g, {0.37});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 1; i < 16; ++i) EXPECT_EQ(out[c * 16 + i], g[c * 16 + i]);
}

TEST(Merge, ZeroAlphaWithGapNamesPixel) {
  Mask m(3, 3, true);
  m.set(2, 1, false);
  try {
    nc::merge_noises({Tensor({1, 3, 3})}, {m}, Tensor({1, 3, 3}), {0.0});
    FAIL();
  } catch (const nc::Error& e) {
    EXPECT_EQ(e.kind(), nc::ErrorKind::kMergeConfig);
    EXPECT_NE(std::string(e.what()).find("x=2, y=1"), std::string::npos);
  }
}

TEST(Merge, ShapeAndConfigErrors) {
  const Tensor g({1, 3, 3});
  EXPECT_THROW(nc::merge_noises({Tensor({1, 3, 4})}, {Mask(3, 3)}, g, {0.1}), nc::Error);
  EXPECT_THROW(nc::merge_noises({Tensor({1, 3, 3})}, {Mask(3, 4)}, g, {0.1}), nc::Error);
  EXPECT_THROW(nc::merge_noises({Tensor({1, 3, 3})}, {}, g, {0.1}), nc::Error);
  EXPECT_THROW(nc::merge_noises({}, {}, g, {-1.0}), nc::Error);
}

TEST(Merge, SingleOwnerPermutationInvariant) {
  std::mt19937_64 rng(45);
  // Disjoint masks: object order cannot matter.
  Mask a(4, 4), b(4, 4), c(4, 4);
  for (std::size_t i = 0; i < 16; ++i) (i % 3 == 0 ? a : i % 3 == 1 ? b : c).set_index(i);
  std::vector<Tensor> objs;
  for (int n = 0; n < 3; ++n) objs.push_back(nc::testing::random_tensor(rng, {1, 4, 4}));
  const Tensor g = nc::testing::random_tensor(rng, {1, 4, 4});
  EXPECT_EQ(nc::merge_noises(objs, {a, b, c}, g, {0.1}),
            nc::merge_noises({objs[2], objs[0], objs[1]}, {c, a, b}, g, {0.1}));
}
