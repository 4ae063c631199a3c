#include "noisecollage/eval.hpp"

#include <cmath>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage {

namespace {

void check_image(const Tensor& image, const Mask& mask) {
  if (image.rank() != 3 || image.extent(1) != mask.height() || image.extent(2) != mask.width()) {
    throw Error(ErrorKind::kShape, "image " + shape_string(image.shape()) + " does not match a " +
                                       std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                                       " mask");
  }
}

const AnalyticCondition& analytic_of(const SceneObject& obj, std::size_t n) {
  const auto* a = std::get_if<AnalyticCondition>(&obj.condition);
  if (a == nullptr) throw Error(ErrorKind::kConfig, "objects[" + std::to_string(n) + "] has no analytic target");
  return *a;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s;
}

}  // namespace

RegionStats region_stats(const Tensor& image, const Mask& mask) {
  check_image(image, mask);
  const std::size_t n = mask.count();
  if (n == 0) throw Error(ErrorKind::kDegenerateRegion, "region statistics over an empty mask");
  const std::size_t channels = image.extent(0), plane = mask.pixel_count();
  RegionStats out{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
  for (std::size_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p)
      if (mask.at_index(p)) sum += image[c * plane + p];
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t p = 0; p < plane; ++p)
      if (mask.at_index(p)) sq += (image[c * plane + p] - mean) * (image[c * plane + p] - mean);
    out.mean[c] = mean;
    out.std[c] = std::sqrt(sq / static_cast<double>(n));
  }
  return out;
}

RegionTarget region_target(const AnalyticCondition& cond, const Mask& mask) {
  check_image(cond.mean, mask);
  const std::size_t n = mask.count();
  if (n == 0) throw Error(ErrorKind::kDegenerateRegion, "region target over an empty mask");
  const std::size_t channels = cond.mean.extent(0), plane = mask.pixel_count();
  RegionTarget t{std::vector<double>(channels, 0.0), 0.0};
  for (std::size_t p = 0; p < plane; ++p) {
    if (!mask.at_index(p)) continue;
    for (std::size_t c = 0; c < channels; ++c) t.mean[c] += cond.mean[c * plane + p];
    t.sigma += cond.sigma[p];
  }
  for (auto& m : t.mean) m /= static_cast<double>(n);
  t.sigma /= static_cast<double>(n);
  return t;
}

double condition_match_score(const Tensor& image, const Mask& mask, const AnalyticCondition& target) {
  const RegionStats stats = region_stats(image, mask);
  const RegionTarget tgt = region_target(target, mask);
  const double d2 = squared_distance(stats.mean, tgt.mean);
  if (tgt.sigma == 0.0) return d2 == 0.0 ? 1.0 : 0.0;
  const double channels = static_cast<double>(stats.mean.size());
  return std::exp(-d2 / (2.0 * tgt.sigma * tgt.sigma * channels));
}

LayoutAccuracy layout_accuracy(const Tensor& image, const SceneSpec& scene) {
  const PreparedScene prep = prepare_scene(scene);
  const std::size_t n_obj = scene.objects.size();
  if (n_obj == 0) throw Error(ErrorKind::kConfig, "layout accuracy needs at least one object");
  check_image(image, prep.masks.front());

  std::vector<std::vector<double>> targets;
  for (std::size_t n = 0; n < n_obj; ++n) targets.push_back(region_target(analytic_of(scene.objects[n], n), prep.masks[n]).mean);
  for (std::size_t a = 0; a < n_obj; ++a)
    for (std::size_t b = a + 1; b < n_obj; ++b)
      if (targets[a] == targets[b]) {
        throw Error(ErrorKind::kConfig, "objects " + std::to_string(a) + " and " + std::to_string(b) +
                                            " share the same target mean");
      }

  const std::size_t channels = image.extent(0), plane = prep.masks.front().pixel_count();
  LayoutAccuracy out;
  std::vector<std::size_t> owned(n_obj, 0), correct(n_obj, 0);
  std::vector<double> pixel(channels);
  for (std::size_t p = 0; p < plane; ++p) {
    std::size_t hits = 0, owner = 0;
    for (std::size_t n = 0; n < n_obj; ++n)
      if (prep.masks[n].at_index(p)) {
        ++hits;
        owner = n;
      }
    if (hits == 0) continue;
    if (hits > 1) {
      ++out.excluded_overlap_pixels;
      continue;
    }
    for (std::size_t c = 0; c < channels; ++c) pixel[c] = image[c * plane + p];
    std::size_t best = 0;
    double best_d = squared_distance(pixel, targets[0]);
    for (std::size_t n = 1; n < n_obj; ++n) {
      const double d = squared_distance(pixel, targets[n]);
      if (d < best_d) {
        best_d = d;
        best = n;
      }
    }
    ++owned[owner];
    correct[owner] += best == owner;
  }
  std::size_t total_correct = 0;
  for (std::size_t n = 0; n < n_obj; ++n) {
    out.counted_pixels += owned[n];
    total_correct += correct[n];
    out.per_object.push_back(owned[n] ? static_cast<double>(correct[n]) / static_cast<double>(owned[n]) : 0.0);
  }
  if (out.counted_pixels == 0) throw Error(ErrorKind::kConfig, "no pixel belongs to exactly one region");
  out.fraction = static_cast<double>(total_correct) / static_cast<double>(out.counted_pixels);
  return out;
}

EvalReport evaluate(const Tensor& image, const SceneSpec& scene) {
  const PreparedScene prep = prepare_scene(scene);
  EvalReport report;
  if (!scene.objects.empty()) report.layout = layout_accuracy(image, scene);
  for (std::size_t n = 0; n < scene.objects.size(); ++n) {
    RegionScore score;
    score.index = n;
    score.stats = region_stats(image, prep.masks[n]);
    score.match_score = condition_match_score(image, prep.masks[n], analytic_of(scene.objects[n], n));
    score.classification_fraction = report.layout->per_object[n];
    report.regions.push_back(std::move(score));
  }
  return report;
}

}  // namespace noisecollage
