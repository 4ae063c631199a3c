#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "noisecollage/collage.hpp"
#include "noisecollage/condition.hpp"
#include "noisecollage/estimators.hpp"
#include "noisecollage/geometry.hpp"
#include "noisecollage/scheduler.hpp"
#include "noisecollage/tensor.hpp"
#include "noisecollage/unet.hpp"

namespace noisecollage {

enum class Backend { kAnalytic, kUNet };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

struct SceneObject {
  RegionSpec region;
  Condition condition;
  std::optional<HintMap> hint;
};

struct SamplerConfig {
  MergeConfig merge;
  GuidanceConfig guidance;
  std::size_t steps = kDefaultSteps;
  StepKind kind = StepKind::kDdim;
  std::uint64_t seed = 0;
  Backend backend = Backend::kAnalytic;
  std::size_t workers = 1;
  // Keep the merged noise of every step in the report.
  bool dump_noise = false;
};

// A full generation request: N layout regions with their conditions, the
// global condition s_* and the sampler settings.
struct SceneSpec {
  std::size_t channels = 3;
  CanvasSize canvas{32, 32};
  std::vector<SceneObject> objects;
  Condition global_condition = EmptyCondition{};
  SamplerConfig sampler;
};

// Masks derived from a scene: one canvas mask and pyramid per object, plus
// the union of all hints for the global branch.
struct PreparedScene {
  std::vector<Mask> masks;
  std::vector<MaskPyramid> pyramids;
  std::optional<HintMap> global_hint;
};

// Rasterizes every region and checks the scene invariants: non-empty
// regions, alpha = 0 only with full coverage, conditions consistent with
// the backend, hint shapes, sampler ranges. Throws on the first violation.
PreparedScene prepare_scene(const SceneSpec& scene);

// Estimator matching the scene's backend. The UNet uses `weights` when
// given, otherwise init_weights(kDefaultUNetSeed).
inline constexpr std::uint64_t kDefaultUNetSeed = 0x4e43;
std::unique_ptr<NoiseEstimator> make_estimator(const SceneSpec& scene,
                                               const UNetWeights* weights = nullptr);

struct RunReport {
  std::size_t estimator_call_count = 0;
  std::vector<double> step_seconds;  // index 0 is step T
  double total_seconds = 0.0;
  Tensor x0;
  // Merged noise per step (index 0 is step T); filled when dump_noise is set.
  std::vector<Tensor> noise_dumps;
};

// Expected estimator calls: (N + 1) * T, doubled unless g == 1.
std::size_t expected_call_count(std::size_t objects, std::size_t steps, double guidance);

// The denoising loop. Per step t = T..1: every object estimate and the
// global estimate (each guided independently), crop-and-merge, then one
// scheduler update. Uses scene.sampler.workers threads.
RunReport generate(const SceneSpec& scene, const NoiseEstimator& estimator);

// Same contract with an explicit worker count (>= 1). Output is
// bit-identical for every worker count.
RunReport generate_parallel(const SceneSpec& scene, const NoiseEstimator& estimator, std::size_t workers);

}  // namespace noisecollage
