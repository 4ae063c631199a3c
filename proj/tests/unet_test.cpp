#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "noisecollage/error.hpp"
#include "noisecollage/geometry.hpp"
#include "noisecollage/noise.hpp"
#include "noisecollage/unet.hpp"

namespace nc = noisecollage;
using nc::Tensor;

namespace {

const nc::UNetEstimator& shared_unet() {
  static const nc::UNetEstimator est(nc::init_weights(7));
  return est;
}

Tensor noisy_input(std::uint64_t seed) { return nc::NoiseSource(seed).fill(0, 0, {3, 32, 32}); }

nc::MaskPyramid pyramid(const nc::RegionSpec& region) {
  return nc::MaskPyramid(nc::rasterize(region, {32, 32}), nc::default_pyramid_levels({32, 32}));
}

std::size_t error_offset(const std::vector<std::uint8_t>& bytes) {
  try {
    nc::load_weights(bytes);
  } catch (const nc::Error& e) {
    EXPECT_EQ(e.kind(), nc::ErrorKind::kFormat);
    return e.byte_offset().value_or(SIZE_MAX);
  }
  ADD_FAILURE() << "load succeeded";
  return SIZE_MAX;
}

}  // namespace

TEST(UNetWeights, LayoutAndInit) {
  const auto w = nc::init_weights(3);
  for (const auto& [name, shape] : nc::unet_parameter_layout()) EXPECT_EQ(w.get(name).shape(), shape) << name;
  EXPECT_EQ(w, nc::init_weights(3));
  EXPECT_NE(w, nc::init_weights(4));
  for (double v : w.get("attn.norm.gain").values()) EXPECT_EQ(v, 1.0);
  for (double v : w.get("stem.b").values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(w.get("nope"), nc::Error);
}

TEST(UNetWeights, SaveLoadRoundTripIsBitExact) {
  const auto w = nc::init_weights(5);
  const auto bytes = nc::save_weights(w);
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::memcmp(bytes.data(), "NCUW", 4), 0);
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  const auto back = nc::load_weights(bytes);
  EXPECT_EQ(back, w);
  EXPECT_EQ(nc::save_weights(back), bytes);
}

TEST(UNetWeights, CorruptFilesReportOffsets) {
  const auto bytes = nc::save_weights(nc::init_weights(5));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(error_offset(bad_magic), 0u);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(error_offset(bad_version), 4u);
  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 5);
  const std::size_t at = error_offset(truncated);
  EXPECT_GT(at, 12u);
  EXPECT_LE(at, truncated.size());
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(error_offset(trailing), bytes.size());
  EXPECT_EQ(error_offset({}), 0u);
}

TEST(UNetWeights, WrongShapeRejectedByEstimator) {
  auto w = nc::init_weights(1);
  w.tensors["stem.b"] = Tensor({4});
  EXPECT_THROW(nc::UNetEstimator{w}, nc::Error);
}

TEST(UNet, DeterministicAndFinite) {
  const Tensor x = noisy_input(1);
  const nc::Condition cond = nc::TokenCondition{{3, 4}};
  nc::EstimatorRequest req;
  req.x_t = &x;
  req.t = 10;
  req.condition = &cond;
  const Tensor a = shared_unet().estimate(req), b = shared_unet().estimate(req);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), (nc::Shape{3, 32, 32}));
  EXPECT_TRUE(a.all_finite());
}

TEST(UNet, FullMaskEqualsUnmaskedForward) {
  const Tensor x = noisy_input(2);
  const nc::Condition cond = nc::TokenCondition{{5}}, glob = nc::TokenCondition{{9, 10}};
  const auto full = pyramid(nc::Box{0, 0, 32, 32});
  nc::EstimatorRequest req;
  req.branch = nc::Branch::kObject;
  req.x_t = &x;
  req.t = 3;
  req.condition = &cond;
  req.global_condition = &glob;
  req.mask = &full;
  const Tensor masked = shared_unet().forward(req, {});
  const Tensor plain = shared_unet().forward(req, {.force_standard_attention = true});
  EXPECT_EQ(masked, plain);
}

TEST(UNet, AttentionTapIsInvariantOutsideMask) {
  const Tensor x = noisy_input(3);
  const nc::Condition a = nc::TokenCondition{{1, 2}}, b = nc::TokenCondition{{40, 41, 42}};
  const nc::Condition glob = nc::TokenCondition{{7}};
  const auto half = pyramid(nc::Box{0, 0, 16, 32});
  nc::EstimatorRequest req;
  req.branch = nc::Branch::kObject;
  req.x_t = &x;
  req.t = 8;
  req.global_condition = &glob;
  req.mask = &half;
  Tensor tap_a, tap_b;
  req.condition = &a;
  shared_unet().forward(req, {.attention_tap = &tap_a});
  req.condition = &b;
  shared_unet().forward(req, {.attention_tap = &tap_b});
  const nc::Mask& level = half.level({16, 16});
  std::size_t changed_inside = 0;
  for (std::size_t r = 0; r < 256; ++r)
    for (std::size_t j = 0; j < 32; ++j) {
      if (!level.at_index(r)) ASSERT_EQ(tap_a.at(r, j), tap_b.at(r, j));
      else changed_inside += tap_a.at(r, j) != tap_b.at(r, j);
    }
  EXPECT_GT(changed_inside, 0u);
}

TEST(UNet, HintAndTimestepChangeOutput) {
  const Tensor x = noisy_input(4);
  nc::EstimatorRequest req;
  req.x_t = &x;
  req.t = 5;
  const Tensor base = shared_unet().estimate(req);
  nc::HintMap hint{Tensor({3, 32, 32}, 1.0), nc::rasterize(nc::Box{0, 0, 8, 8}, {32, 32})};
  req.hint = &hint;
  EXPECT_NE(shared_unet().estimate(req), base);
  req.hint = nullptr;
  req.t = 6;
  EXPECT_NE(shared_unet().estimate(req), base);
}

TEST(UNet, RequestErrors) {
  const Tensor x = noisy_input(5);
  nc::EstimatorRequest req;
  req.x_t = &x;
  req.t = 1;
  req.branch = nc::Branch::kObject;
  EXPECT_THROW(shared_unet().estimate(req), nc::Error);
  req.branch = nc::Branch::kGlobal;
  const Tensor small({3, 16, 16});
  req.x_t = &small;
  EXPECT_THROW(shared_unet().estimate(req), nc::Error);
  req.x_t = &x;
  const nc::Condition analytic = nc::AnalyticCondition::uniform({0, 0, 0}, 1.0, {32, 32});
  req.condition = &analytic;
  EXPECT_THROW(shared_unet().estimate(req), nc::Error);
  const nc::Condition big = nc::TokenCondition{{64}};
  req.condition = &big;
  EXPECT_THROW(shared_unet().estimate(req), nc::Error);
}

TEST(TimestepEmbedding, Layout) {
  const Tensor e = nc::timestep_embedding(0.0, 8);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(e[i], 1.0);
    EXPECT_EQ(e[i + 4], 0.0);
  }
  const Tensor f = nc::timestep_embedding(3.0, 8);
  EXPECT_DOUBLE_EQ(f[0], std::cos(3.0));
  EXPECT_DOUBLE_EQ(f[4], std::sin(3.0));
}
