#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisecollage/sampler.hpp"
#include "scene_file.hpp"

namespace noisecollage::cli {

struct RegionMetrics {
  std::size_t index = 0;
  std::vector<double> mean;
  std::vector<double> std;
  std::optional<double> match_score;              // analytic targets only
  std::optional<double> classification_fraction;  // analytic targets only

  friend bool operator==(const RegionMetrics&, const RegionMetrics&) = default;
};

struct Metrics {
  // "raw" when computed from the lossless sample, "quantized" when from a PGM/PPM.
  std::string source = "raw";
  std::vector<RegionMetrics> regions;
  std::optional<double> layout_accuracy;
  std::size_t counted_pixels = 0;
  std::size_t excluded_overlap_pixels = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Region statistics for every object; scores and layout accuracy when all
// object conditions are analytic.
Metrics compute_metrics(const Tensor& image, const SceneSpec& scene, std::string source);

nlohmann::ordered_json metrics_to_json(const Metrics& m);
Metrics metrics_from_json(const nlohmann::json& j);

nlohmann::ordered_json report_to_json(const RunReport& report, const SceneFile& scene,
                                      const DisplayMapping& mapping, std::size_t workers);

}  // namespace noisecollage::cli
