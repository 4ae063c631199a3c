#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "documents.hpp"
#include "image_io.hpp"
#include "noisecollage/error.hpp"
#include "noisecollage/unet.hpp"
#include "oracles.hpp"
#include "scene_file.hpp"

namespace nc = noisecollage;
namespace cli = noisecollage::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_scene(const std::string& name, const json& doc) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

json two_region_doc(double alpha = 0.1) {
  json doc = json::parse(R"({
    "canvas": {"channels": 1, "height": 16, "width": 16},
    "objects": [
      {"region": {"box": [0, 0, 8, 16]}, "condition": {"analytic": {"mean": [1.0], "sigma": 0.3}}},
      {"region": {"box": [8, 0, 16, 16]}, "condition": {"analytic": {"mean": [-1.0], "sigma": 0.3}}}
    ],
    "global": {"condition": {"analytic": {"mean": [0.0], "sigma": 0.5}}},
    "sampler": {"steps": 5, "seed": 3}
  })");
  doc["sampler"]["alpha"] = alpha;
  return doc;
}

json read_json(const std::string& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_F(CliTest, ValidateAcceptsSampleScenes) {
  for (const char* name : {"two_regions.json", "unet_layout.json"}) {
    EXPECT_EQ(cli::cmd_validate(std::string(NC_SCENES_DIR) + "/" + name, out_, err_), cli::kExitOk) << err_.str();
  }
  EXPECT_NE(out_.str().find("OK"), std::string::npos);
}

TEST_F(CliTest, ValidateRejectsUncoveredZeroAlpha) {
  json doc = two_region_doc(0.0);
  doc["objects"].erase(1);
  EXPECT_EQ(cli::cmd_validate(write_scene("s.json", doc), out_, err_), cli::kExitValidation);
  EXPECT_NE(err_.str().find("alpha = 0"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ValidateRejectsDegenerateBox) {
  json doc = two_region_doc();
  doc["objects"][0]["region"]["box"] = {5, 0, 5, 16};
  EXPECT_EQ(cli::cmd_validate(write_scene("s.json", doc), out_, err_), cli::kExitValidation);
  EXPECT_NE(err_.str().find("objects[0].region"), std::string::npos) << err_.str();
}

TEST_F(CliTest, StrictSchema) {
  json doc = two_region_doc();
  doc["objects"][1]["condition"]["analytic"]["sigmaa"] = 1.0;
  try {
    cli::parse_scene(doc.dump());
    FAIL();
  } catch (const nc::Error& e) {
    EXPECT_EQ(e.kind(), nc::ErrorKind::kSchema);
    EXPECT_NE(std::string(e.what()).find("objects[1].condition.analytic"), std::string::npos) << e.what();
  }
  try {
    cli::parse_scene("{\n  \"canvas\": {\n    \"channels\": 1,,\n  }\n}");
    FAIL();
  } catch (const nc::Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_scene(R"({"canvas": {"channels": "three"}})"), nc::Error);
  EXPECT_THROW(cli::parse_scene(R"({"objects": [{"region": {"circle": [1, 2, 3]}, "condition": {"empty": {}}}]})"),
               nc::Error);
}

TEST_F(CliTest, CanonicalFormIsAFixedPoint) {
  std::vector<std::string> texts{two_region_doc().dump()};
  for (const char* name : {"two_regions.json", "unet_layout.json"}) {
    std::ifstream in(std::string(NC_SCENES_DIR) + "/" + name);
    texts.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  for (const auto& text : texts) {
    const cli::SceneFile a = cli::parse_scene(text);
    const std::string canon = cli::scene_to_json(a).dump();
    const cli::SceneFile b = cli::parse_scene(canon);
    EXPECT_EQ(a, b);
    EXPECT_EQ(cli::scene_to_json(b).dump(), canon);
  }
}

TEST_F(CliTest, GenerateIsDeterministicAndReportsCalls) {
  const std::string scene = write_scene("s.json", two_region_doc());
  ASSERT_EQ(cli::cmd_generate(scene, path("a"), {}, out_, err_), cli::kExitOk) << err_.str();
  ASSERT_EQ(cli::cmd_generate(scene, path("b"), {}, out_, err_), cli::kExitOk) << err_.str();
  for (const char* f : {"sample.pgm", "sample.ncts", "metrics.json"})
    EXPECT_EQ(cli::read_file(path("a") + "/" + f), cli::read_file(path("b") + "/" + f)) << f;
  const json report = read_json(path("a") + "/report.json");
  EXPECT_EQ(report["estimator_call_count"], 3 * 5 * 2);
  EXPECT_EQ(report["step_seconds"].size(), 5u);
  EXPECT_EQ(report["defaults"]["alpha"], 0.1);
}

TEST_F(CliTest, GuidanceScaleChangesOutput) {
  const std::string scene = write_scene("s.json", two_region_doc());
  cli::GenerateFlags g0, g1;
  g0.guidance = 0.0;
  g1.guidance = 1.0;
  ASSERT_EQ(cli::cmd_generate(scene, path("g0"), g0, out_, err_), cli::kExitOk);
  ASSERT_EQ(cli::cmd_generate(scene, path("g1"), g1, out_, err_), cli::kExitOk);
  EXPECT_NE(cli::read_file(path("g0") + "/sample.ncts"), cli::read_file(path("g1") + "/sample.ncts"));
}

TEST_F(CliTest, SingleStepCallCount) {
  cli::GenerateFlags flags;
  flags.steps = 1;
  flags.dump_noise = true;
  ASSERT_EQ(cli::cmd_generate(write_scene("s.json", two_region_doc()), path("o"), flags, out_, err_), cli::kExitOk);
  EXPECT_EQ(read_json(path("o") + "/report.json")["estimator_call_count"], 3 * 1 * 2);
  EXPECT_TRUE(fs::exists(path("o") + "/noise/step_0001.ncts"));
}

TEST_F(CliTest, WorkerEnvironmentVariable) {
  const std::string scene = write_scene("s.json", two_region_doc());
  ::setenv("NC_WORKERS", "3", 1);
  const int rc = cli::cmd_generate(scene, path("w"), {}, out_, err_);
  ::setenv("NC_WORKERS", "three", 1);
  const int bad = cli::cmd_generate(scene, path("bad"), {}, out_, err_);
  ::unsetenv("NC_WORKERS");
  ASSERT_EQ(rc, cli::kExitOk);
  EXPECT_EQ(read_json(path("w") + "/report.json")["workers"], 3);
  EXPECT_EQ(bad, cli::kExitValidation);
  EXPECT_FALSE(fs::exists(path("bad")));
}

TEST_F(CliTest, FailedGenerateLeavesNoOutputs) {
  auto w = nc::init_weights(1);
  for (double& v : w.tensors["head.b"].values()) v = std::numeric_limits<double>::infinity();
  cli::write_file(path("w.ncuw"), nc::save_weights(w));
  cli::GenerateFlags flags;
  flags.weights_path = path("w.ncuw");
  flags.steps = 2;
  const int rc = cli::cmd_generate(std::string(NC_SCENES_DIR) + "/unet_layout.json", path("out/nested"), flags, out_, err_);
  EXPECT_EQ(rc, cli::kExitRuntime);
  EXPECT_NE(err_.str().find("numeric-failure"), std::string::npos) << err_.str();
  EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(CliTest, EvalScoresPaintedImages) {
  const std::string scene = write_scene("s.json", two_region_doc());
  nc::Tensor good({1, 16, 16}), swapped({1, 16, 16});
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      good.at(0, y, x) = x < 8 ? 1.0 : -1.0;
      swapped.at(0, y, x) = -good.at(0, y, x);
    }
  cli::write_file(path("good.ncts"), cli::encode_tensor(good));
  cli::write_file(path("swapped.ncts"), cli::encode_tensor(swapped));
  ASSERT_EQ(cli::cmd_eval(path("good.ncts"), scene, path("m.json"), out_, err_), cli::kExitOk) << err_.str();
  const json m = read_json(path("m.json"));
  EXPECT_EQ(m["layout_accuracy"], 1.0);
  EXPECT_EQ(m["regions"][0]["match_score"], 1.0);
  EXPECT_EQ(m["source"], "raw");
  ASSERT_EQ(cli::cmd_eval(path("swapped.ncts"), scene, path("s.json.out"), out_, err_), cli::kExitOk);
  EXPECT_EQ(read_json(path("s.json.out"))["layout_accuracy"], 0.0);

  cli::write_file(path("small.ncts"), cli::encode_tensor(nc::Tensor({1, 8, 8})));
  EXPECT_EQ(cli::cmd_eval(path("small.ncts"), scene, std::nullopt, out_, err_), cli::kExitValidation);
}

TEST_F(CliTest, EvalOfGeneratedPgm) {
  const std::string scene = write_scene("s.json", two_region_doc());
  // Unguided, so every value stays inside the display window.
  cli::GenerateFlags flags;
  flags.guidance = 1.0;
  ASSERT_EQ(cli::cmd_generate(scene, path("o"), flags, out_, err_), cli::kExitOk);
  ASSERT_EQ(cli::cmd_eval(path("o/sample.pgm"), scene, path("m.json"), out_, err_), cli::kExitOk) << err_.str();
  const json q = read_json(path("m.json")), raw = read_json(path("o/metrics.json"));
  EXPECT_EQ(q["source"], "quantized");
  EXPECT_NEAR(q["regions"][0]["mean"][0].get<double>(), raw["regions"][0]["mean"][0].get<double>(), 0.02);
}

TEST_F(CliTest, DumpMasks) {
  json doc = two_region_doc();
  doc["objects"][0]["region"]["box"] = {0, 0, 16, 16};
  doc["objects"][1]["region"] = {{"polygon", {{1, 1}, {14, 3}, {6, 15}}}};
  ASSERT_EQ(cli::cmd_dump_masks(write_scene("s.json", doc), path("m"), out_, err_), cli::kExitOk) << err_.str();
  const cli::Raster full = cli::decode_pnm(cli::read_file(path("m/region_0.pgm")));
  EXPECT_TRUE(std::all_of(full.pixels.begin(), full.pixels.end(), [](auto v) { return v == 255; }));
  EXPECT_TRUE(fs::exists(path("m/region_0_8x8.pgm")));
  const cli::Raster poly = cli::decode_pnm(cli::read_file(path("m/region_1.pgm")));
  const cli::Raster cov = cli::decode_pnm(cli::read_file(path("m/coverage.pgm")));
  const std::vector<nc::Point> verts{{1, 1}, {14, 3}, {6, 15}};
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      const bool in = nc::testing::point_in_polygon_oracle(verts, x + 0.5, y + 0.5);
      ASSERT_EQ(poly.pixels[y * 16 + x], in ? 255 : 0);
      ASSERT_EQ(cov.pixels[y * 16 + x], in ? 2 : 1);
    }
}

TEST_F(CliTest, InitWeightsWritesLoadableFile) {
  ASSERT_EQ(cli::cmd_init_weights(path("w.ncuw"), 9, out_, err_), cli::kExitOk);
  EXPECT_EQ(nc::load_weights(cli::read_file(path("w.ncuw"))), nc::init_weights(9));
  cli::GenerateFlags flags;
  flags.weights_path = path("missing.ncuw");
  EXPECT_EQ(cli::cmd_generate(std::string(NC_SCENES_DIR) + "/unet_layout.json", path("o"), flags, out_, err_),
            cli::kExitRuntime);
}

TEST(Documents, MetricsRoundTrip) {
  cli::Metrics m;
  m.source = "quantized";
  m.regions.push_back({0, {0.25, -1.5}, {0.1, 0.2}, 0.875, 1.0});
  m.regions.push_back({1, {3.0}, {0.0}, std::nullopt, std::nullopt});
  m.layout_accuracy = 0.96875;
  m.counted_pixels = 12;
  m.excluded_overlap_pixels = 3;
  EXPECT_EQ(cli::metrics_from_json(json::parse(cli::metrics_to_json(m).dump())), m);
}

TEST(ImageIo, PnmRoundTrip) {
  std::mt19937_64 rng(81);
  for (std::size_t channels : {1u, 3u}) {
    cli::Raster r{channels, 5, 7, {}};
    for (std::size_t i = 0; i < channels * 35; ++i) r.pixels.push_back(static_cast<std::uint8_t>(rng()));
    EXPECT_EQ(cli::decode_pnm(cli::encode_pnm(r)), r);
  }
  const auto p5 = cli::encode_pnm(cli::Raster{1, 1, 2, {0, 255}});
  EXPECT_EQ(std::string(p5.begin(), p5.begin() + 2), "P5");
  EXPECT_THROW(cli::decode_pnm({'P', '5', '\n'}), nc::Error);
}

TEST(ImageIo, QuantizeWithinHalfStep) {
  std::mt19937_64 rng(82);
  const nc::Tensor t = nc::testing::random_tensor(rng, {3, 4, 4}, -2.0, 2.0);
  const cli::DisplayMapping map{-2.0, 2.0};
  const nc::Tensor back = cli::dequantize(cli::quantize(t, map), map);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(std::abs(back[i] - t[i]), 0.5 * 4.0 / 255.0 + 1e-12);
  const cli::Raster clamped = cli::quantize(nc::Tensor({1, 1, 2}, 100.0), map);
  EXPECT_EQ(clamped.pixels[0], 255);
}

TEST(ImageIo, TensorRoundTripAndCorruption) {
  std::mt19937_64 rng(83);
  const nc::Tensor t = nc::testing::random_tensor(rng, {2, 3, 4});
  const auto bytes = cli::encode_tensor(t);
  EXPECT_EQ(cli::decode_tensor(bytes), t);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(cli::decode_tensor(bad), nc::Error);
  EXPECT_THROW(cli::decode_tensor({bytes.begin(), bytes.end() - 1}), nc::Error);
}
