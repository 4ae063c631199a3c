#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisecollage/geometry.hpp"
#include "noisecollage/sampler.hpp"

namespace noisecollage::cli {

// User-facing condition: constant per-channel target, token ids, or empty.
struct ConditionFile {
  enum class Kind { kEmpty, kAnalytic, kTokens };
  Kind kind = Kind::kEmpty;
  std::vector<double> mean;
  double sigma = 0.0;
  std::vector<std::size_t> tokens;

  friend bool operator==(const ConditionFile&, const ConditionFile&) = default;
};

struct HintFile {
  std::vector<double> target;  // per channel, applied inside `region`
  RegionSpec region;

  friend bool operator==(const HintFile&, const HintFile&) = default;
};

struct ObjectFile {
  RegionSpec region;
  ConditionFile condition;
  std::optional<HintFile> hint;

  friend bool operator==(const ObjectFile&, const ObjectFile&) = default;
};

struct SamplerFile {
  double alpha = kDefaultAlpha;
  std::size_t steps = kDefaultSteps;
  double guidance = kDefaultGuidance;
  std::string kind = "ddim";
  std::uint64_t seed = 0;
  std::string backend = "analytic";
  std::size_t workers = 1;

  friend bool operator==(const SamplerFile&, const SamplerFile&) = default;
};

// Scene document:
//
// {
//   "canvas":  {"channels": 3, "height": 32, "width": 32},
//   "objects": [{"region": {"box": [x0, y0, x1, y1]} | {"polygon": [[x, y], ...]},
//                "condition": {"analytic": {"mean": [..], "sigma": s}}
//                           | {"tokens": [ids]} | {"empty": {}},
//                "hint": {"target": [..], "region": {...}}}],
//   "global":  {"condition": {...}},
//   "sampler": {"alpha", "steps", "guidance", "kind", "seed", "backend", "workers"}
// }
//
// "objects", "global", "sampler", "hint" and every sampler field are
// optional. Unknown keys are rejected.
struct SceneFile {
  std::size_t channels = 3;
  std::size_t height = 32;
  std::size_t width = 32;
  std::vector<ObjectFile> objects;
  ConditionFile global;
  SamplerFile sampler;

  friend bool operator==(const SceneFile&, const SceneFile&) = default;
};

// Throws Error(kSchema) naming the JSON path (e.g. "objects[1].region.box")
// or, for malformed text, the line and column.
SceneFile parse_scene(const std::string& text);
SceneFile load_scene(const std::string& path);

// Canonical form: every field written, keys in a fixed order.
nlohmann::ordered_json scene_to_json(const SceneFile& scene);

SceneSpec to_scene_spec(const SceneFile& scene);

// Affine display window [lo, hi] mapped to [0, 255].
struct DisplayMapping {
  double lo = -3.0;
  double hi = 3.0;
};

// [min target - 3 sigma, max target + 3 sigma] over all analytic
// conditions and hints; the N(0, 1) prior counts for empty conditions and
// the token backend.
DisplayMapping display_mapping(const SceneFile& scene);

}  // namespace noisecollage::cli
