#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "noisecollage/condition.hpp"
#include "noisecollage/geometry.hpp"
#include "noisecollage/sampler.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

struct RegionStats {
  std::vector<double> mean;  // per channel
  std::vector<double> std;   // per channel, population (divides by n)
};

// Statistics over the set pixels of `mask`. Throws a degenerate-region
// error for an empty mask.
RegionStats region_stats(const Tensor& image, const Mask& mask);

// Target of an analytic condition over a region: per-channel average of
// the mean field and the average sigma.
struct RegionTarget {
  std::vector<double> mean;
  double sigma = 0.0;
};

RegionTarget region_target(const AnalyticCondition& cond, const Mask& mask);

// exp(-|m - mu|^2 / (2 sigma^2 C)) with m the region mean and mu, sigma the
// region target. sigma = 0 scores 1 on an exact match and 0 otherwise.
double condition_match_score(const Tensor& image, const Mask& mask, const AnalyticCondition& target);

struct LayoutAccuracy {
  double fraction = 0.0;
  std::size_t counted_pixels = 0;
  // Pixels inside two or more regions are not counted.
  std::size_t excluded_overlap_pixels = 0;
  // Per object: fraction of its exclusively owned pixels classified to it.
  std::vector<double> per_object;
};

// Over pixels owned by exactly one region, the fraction whose nearest
// target mean (Euclidean over channels) is the owner's. Requires analytic
// conditions with pairwise-distinct targets (config error otherwise) and
// at least one owned pixel.
LayoutAccuracy layout_accuracy(const Tensor& image, const SceneSpec& scene);

struct RegionScore {
  std::size_t index = 0;
  RegionStats stats;
  double match_score = 0.0;
  double classification_fraction = 0.0;
};

struct EvalReport {
  std::vector<RegionScore> regions;
  std::optional<LayoutAccuracy> layout;  // absent for scenes without objects
};

EvalReport evaluate(const Tensor& image, const SceneSpec& scene);

}  // namespace noisecollage
