#include "documents.hpp"

#include <algorithm>

#include "noisecollage/error.hpp"
#include "noisecollage/eval.hpp"

namespace noisecollage::cli {

using nlohmann::json;
using nlohmann::ordered_json;

Metrics compute_metrics(const Tensor& image, const SceneSpec& scene, std::string source) {
  const PreparedScene prep = prepare_scene(scene);
  Metrics m;
  m.source = std::move(source);
  const bool analytic = !scene.objects.empty() &&
                        std::all_of(scene.objects.begin(), scene.objects.end(),
                                    [](const SceneObject& o) { return is_analytic(o.condition); });
  if (analytic) {
    const EvalReport report = evaluate(image, scene);
    for (const auto& r : report.regions) {
      m.regions.push_back({r.index, r.stats.mean, r.stats.std, r.match_score, r.classification_fraction});
    }
    m.layout_accuracy = report.layout->fraction;
    m.counted_pixels = report.layout->counted_pixels;
    m.excluded_overlap_pixels = report.layout->excluded_overlap_pixels;
    return m;
  }
  for (std::size_t n = 0; n < scene.objects.size(); ++n) {
    const RegionStats s = region_stats(image, prep.masks[n]);
    m.regions.push_back({n, s.mean, s.std, std::nullopt, std::nullopt});
  }
  return m;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> read_optional(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

ordered_json metrics_to_json(const Metrics& m) {
  ordered_json regions = ordered_json::array();
  for (const auto& r : m.regions) {
    regions.push_back(ordered_json{{"index", r.index},
                                   {"mean", r.mean},
                                   {"std", r.std},
                                   {"match_score", optional_number(r.match_score)},
                                   {"classification_fraction", optional_number(r.classification_fraction)}});
  }
  return ordered_json{{"source", m.source},
                      {"regions", std::move(regions)},
                      {"layout_accuracy", optional_number(m.layout_accuracy)},
                      {"counted_pixels", m.counted_pixels},
                      {"excluded_overlap_pixels", m.excluded_overlap_pixels}};
}

Metrics metrics_from_json(const json& j) {
  try {
    Metrics m;
    m.source = j.at("source").get<std::string>();
    for (const auto& r : j.at("regions")) {
      m.regions.push_back({r.at("index").get<std::size_t>(), r.at("mean").get<std::vector<double>>(),
                           r.at("std").get<std::vector<double>>(), read_optional(r, "match_score"),
                           read_optional(r, "classification_fraction")});
    }
    m.layout_accuracy = read_optional(j, "layout_accuracy");
    m.counted_pixels = j.at("counted_pixels").get<std::size_t>();
    m.excluded_overlap_pixels = j.at("excluded_overlap_pixels").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("metrics document: ") + e.what());
  }
}

ordered_json report_to_json(const RunReport& report, const SceneFile& scene, const DisplayMapping& mapping,
                            std::size_t workers) {
  return ordered_json{
      {"estimator_call_count", report.estimator_call_count},
      {"expected_call_count",
       expected_call_count(scene.objects.size(), scene.sampler.steps, scene.sampler.guidance)},
      {"objects", scene.objects.size()},
      {"steps", scene.sampler.steps},
      {"alpha", scene.sampler.alpha},
      {"guidance", scene.sampler.guidance},
      {"kind", scene.sampler.kind},
      {"seed", scene.sampler.seed},
      {"backend", scene.sampler.backend},
      {"workers", workers},
      {"defaults", ordered_json{{"alpha", kDefaultAlpha}, {"steps", kDefaultSteps}, {"guidance", kDefaultGuidance}}},
      {"display_mapping", ordered_json{{"lo", mapping.lo}, {"hi", mapping.hi}}},
      {"step_seconds", report.step_seconds},
      {"total_seconds", report.total_seconds},
  };
}

}  // namespace noisecollage::cli
