#include "noisecollage/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <string>
#include <thread>

#include "noisecollage/error.hpp"
#include "noisecollage/noise.hpp"

namespace noisecollage {

std::string_view to_string(Backend backend) {
  return backend == Backend::kAnalytic ? "analytic" : "unet";
}

Backend parse_backend(std::string_view name) {
  if (name == "analytic") return Backend::kAnalytic;
  if (name == "unet") return Backend::kUNet;
  throw Error(ErrorKind::kConfig, "unknown backend '" + std::string(name) + "'");
}

namespace {

std::string object_label(std::size_t n) { return "objects[" + std::to_string(n) + "]"; }

void check_backend_condition(const Condition& c, Backend backend, const std::string& where) {
  if (is_empty(c)) return;
  if (backend == Backend::kAnalytic && !is_analytic(c)) {
    throw Error(ErrorKind::kConfig, where + ": analytic backend requires analytic conditions");
  }
  if (backend == Backend::kUNet && !is_tokens(c)) {
    throw Error(ErrorKind::kConfig, where + ": unet backend requires token conditions");
  }
}

}  // namespace

PreparedScene prepare_scene(const SceneSpec& scene) {
  const SamplerConfig& cfg = scene.sampler;
  if (scene.channels == 0 || scene.canvas.height == 0 || scene.canvas.width == 0) {
    throw Error(ErrorKind::kConfig, "canvas extents must be positive");
  }
  if (cfg.steps < 1) throw Error(ErrorKind::kConfig, "sampler.steps must be >= 1");
  if (cfg.workers < 1) throw Error(ErrorKind::kConfig, "sampler.workers must be >= 1");
  if (!(cfg.guidance.scale >= 0.0) || !std::isfinite(cfg.guidance.scale)) {
    throw Error(ErrorKind::kConfig, "sampler.guidance must be finite and >= 0");
  }
  if (!(cfg.merge.alpha >= 0.0) || !std::isfinite(cfg.merge.alpha)) {
    throw Error(ErrorKind::kMergeConfig, "sampler.alpha must be finite and >= 0");
  }
  if (cfg.backend == Backend::kUNet &&
      (scene.channels != unet::kImageChannels || scene.canvas.height != unet::kCanvas ||
       scene.canvas.width != unet::kCanvas)) {
    throw Error(ErrorKind::kConfig, "unet backend requires a 3 x 32 x 32 canvas");
  }

  check_backend_condition(scene.global_condition, cfg.backend, "global.condition");
  validate_condition(scene.global_condition, scene.channels, scene.canvas);

  PreparedScene prep;
  const auto levels = default_pyramid_levels(scene.canvas);
  std::vector<const HintMap*> hints;
  for (std::size_t n = 0; n < scene.objects.size(); ++n) {
    const SceneObject& obj = scene.objects[n];
    try {
      prep.masks.push_back(rasterize(obj.region, scene.canvas));
    } catch (const Error& e) {
      throw Error(e.kind(), object_label(n) + ".region: " + e.what());
    }
    prep.pyramids.emplace_back(prep.masks.back(), levels);
    check_backend_condition(obj.condition, cfg.backend, object_label(n) + ".condition");
    validate_condition(obj.condition, scene.channels, scene.canvas);
    if (obj.hint) {
      if (obj.hint->values.shape() != Shape{scene.channels, scene.canvas.height, scene.canvas.width} ||
          obj.hint->active.size() != scene.canvas) {
        throw Error(ErrorKind::kConfig, object_label(n) + ".hint does not match the canvas");
      }
      if (!obj.hint->values.all_finite()) throw Error(ErrorKind::kConfig, object_label(n) + ".hint is not finite");
      hints.push_back(&*obj.hint);
    }
  }
  if (cfg.merge.alpha == 0.0) {
    const Coverage cov = coverage_check(prep.masks, scene.canvas);
    if (!cov.covered) {
      throw Error(ErrorKind::kMergeConfig, "alpha = 0 requires the object regions to cover the canvas; " +
                                               std::to_string(cov.uncovered_count) + " pixels are uncovered");
    }
  }
  prep.global_hint = merge_hints(hints);
  return prep;
}

std::unique_ptr<NoiseEstimator> make_estimator(const SceneSpec& scene, const UNetWeights* weights) {
  if (scene.sampler.backend == Backend::kAnalytic) {
    return std::make_unique<AnalyticEstimator>(make_schedule(scene.sampler.steps));
  }
  return std::make_unique<UNetEstimator>(weights ? *weights : init_weights(kDefaultUNetSeed));
}

std::size_t expected_call_count(std::size_t objects, std::size_t steps, double guidance) {
  return (objects + 1) * steps * (guidance == 1.0 ? 1 : 2);
}

namespace {

// Runs fn(0..count-1) on up to `workers` threads (the caller included).
// Rethrows the exception of the lowest failing index, so failures surface
// the same way for any worker count.
void run_tasks(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> helpers;
    for (std::size_t w = 1; w < std::min(workers, count); ++w) helpers.emplace_back(drain);
    drain();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void require_finite(const Tensor& t, std::size_t step, const char* what) {
  if (!t.all_finite()) {
    throw Error(ErrorKind::kNumericFailure, std::string(what) + " became non-finite at step t=" + std::to_string(step));
  }
}

}  // namespace

RunReport generate_parallel(const SceneSpec& scene, const NoiseEstimator& estimator, std::size_t workers) {
  if (workers < 1) throw Error(ErrorKind::kConfig, "worker count must be >= 1");
  const PreparedScene prep = prepare_scene(scene);
  const SamplerConfig& cfg = scene.sampler;
  const NoiseSchedule sched = make_schedule(cfg.steps);
  const NoiseSource noise(cfg.seed);
  const std::size_t n_objects = scene.objects.size();
  const double g = cfg.guidance.scale;
  const bool guided = g != 1.0;
  const std::size_t per_branch = guided ? 2 : 1;
  const std::size_t task_count = (n_objects + 1) * per_branch;
  const Condition empty = EmptyCondition{};

  RunReport report;
  Tensor x = noise.fill(NoiseSource::kSamplerStream, NoiseSource::kInitialNoiseStep,
                        {scene.channels, scene.canvas.height, scene.canvas.width});
  std::atomic<std::size_t> calls{0};
  std::vector<Tensor> results(task_count);
  const auto started = std::chrono::steady_clock::now();

  for (std::size_t t = cfg.steps; t >= 1; --t) {
    const auto step_started = std::chrono::steady_clock::now();
    // Task layout: branch b in [0, N] (N is the global branch), then
    // conditional (slot 0) or unconditional (slot 1).
    run_tasks(task_count, workers, [&](std::size_t task) {
      const std::size_t branch = task / per_branch;
      const bool uncond = task % per_branch == 1;
      EstimatorRequest req;
      req.x_t = &x;
      req.t = t;
      if (branch < n_objects) {
        const SceneObject& obj = scene.objects[branch];
        req.branch = Branch::kObject;
        req.condition = uncond ? &empty : &obj.condition;
        req.global_condition = uncond ? &empty : &scene.global_condition;
        req.mask = &prep.pyramids[branch];
        req.hint = obj.hint ? &*obj.hint : nullptr;
      } else {
        req.branch = Branch::kGlobal;
        req.condition = uncond ? &empty : &scene.global_condition;
        req.hint = prep.global_hint ? &*prep.global_hint : nullptr;
      }
      results[task] = estimator.estimate(req);
      calls.fetch_add(1, std::memory_order_relaxed);
    });

    std::vector<Tensor> eps_objects;
    eps_objects.reserve(n_objects);
    auto guided_eps = [&](std::size_t branch) {
      const Tensor& cond = results[branch * per_branch];
      return guided ? cfg_combine(results[branch * per_branch + 1], cond, g) : cond;
    };
    for (std::size_t n = 0; n < n_objects; ++n) eps_objects.push_back(guided_eps(n));
    const Tensor eps_global = guided_eps(n_objects);
    Tensor eps = merge_noises(eps_objects, prep.masks, eps_global, cfg.merge);
    require_finite(eps, t, "merged noise");
    x = step(x, eps, t, sched, cfg.kind, &noise);
    require_finite(x, t, "sample");
    if (cfg.dump_noise) report.noise_dumps.push_back(std::move(eps));

    report.step_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - step_started).count());
  }

  report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  report.estimator_call_count = calls.load();
  report.x0 = std::move(x);
  return report;
}

RunReport generate(const SceneSpec& scene, const NoiseEstimator& estimator) {
  return generate_parallel(scene, estimator, scene.sampler.workers);
}

}  // namespace noisecollage
