#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "noisecollage/noise.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

inline constexpr double kBetaStart = 1e-4;
inline constexpr double kBetaEnd = 0.02;
// Length of the underlying linear-beta diffusion the sampling steps are
// strided over.
inline constexpr std::size_t kTrainSteps = 1000;

inline constexpr std::size_t kDefaultSteps = 50;
inline constexpr double kDefaultGuidance = 7.5;

// Sampling discretization with steps t = 1..T. Step t covers the training
// interval (timestep(t-1), timestep(t)] of a linear-beta diffusion over
// max(kTrainSteps, T) steps, with timestep(t) = (t - 1) * stride. Per-step
// alpha is the product of the training retentions in that interval, beta
// is 1 - alpha, and alpha_bar is the running product of alpha.
class NoiseSchedule {
 public:
  std::size_t steps() const noexcept { return alpha_.size(); }

  // 1-based accessors. alpha_bar(0) is defined as 1.
  double beta(std::size_t t) const;
  double alpha(std::size_t t) const;
  double alpha_bar(std::size_t t) const;
  double sqrt_alpha_bar(std::size_t t) const;
  double sqrt_one_minus_alpha_bar(std::size_t t) const;
  // Index into the training diffusion that step t lands on.
  std::size_t train_timestep(std::size_t t) const;

  // Throws an index error unless 1 <= t <= steps().
  void check_step(std::size_t t) const;

 private:
  friend NoiseSchedule make_schedule(std::size_t steps);

  std::vector<double> beta_, alpha_, alpha_bar_, sqrt_ab_, sqrt_1mab_;
  std::vector<std::size_t> train_t_;
};

// Throws a config error for steps < 1.
NoiseSchedule make_schedule(std::size_t steps);

struct GuidanceConfig {
  double scale = kDefaultGuidance;
};

enum class StepKind { kDdim, kAncestral };

std::string_view to_string(StepKind kind);
StepKind parse_step_kind(std::string_view name);

// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
Tensor add_noise(const Tensor& x0, const Tensor& eps, std::size_t t, const NoiseSchedule& sched);

// One reverse update x_t -> x_{t-1}. The ancestral kind draws its noise
// from stream 0, step t of `noise`; it may be null for DDIM and at t = 1.
Tensor step(const Tensor& x_t, const Tensor& eps_hat, std::size_t t, const NoiseSchedule& sched,
            StepKind kind, const NoiseSource* noise = nullptr);

// eps_uncond + g * (eps_cond - eps_uncond).
Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double g);

}  // namespace noisecollage
