#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "noisecollage/condition.hpp"
#include "noisecollage/geometry.hpp"
#include "noisecollage/scheduler.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

enum class Branch { kGlobal, kObject };

// One noise estimation: eps_n(x_t | t, l_n, s_n) for an object branch
// (`condition` = s_n, `global_condition` = s_*, `mask` = l_n), or
// eps_*(x_t | t, s_*) for the global branch (`condition` = s_*).
struct EstimatorRequest {
  Branch branch = Branch::kGlobal;
  const Tensor* x_t = nullptr;
  std::size_t t = 0;
  const Condition* condition = nullptr;
  const Condition* global_condition = nullptr;
  const MaskPyramid* mask = nullptr;
  const HintMap* hint = nullptr;
};

class NoiseEstimator {
 public:
  virtual ~NoiseEstimator() = default;
  virtual Tensor estimate(const EstimatorRequest& req) const = 0;
  virtual std::string_view name() const = 0;
};

// Closed-form optimal predictor for the per-pixel Gaussian prior
// N(mu, sigma^2) under forward noising:
//
//   eps = sqrt(1 - ab) * (x_t - sqrt(ab) * mu) / (ab * sigma^2 + 1 - ab)
//
// which is -sqrt(1 - ab) times the score of the noised marginal. An empty
// condition uses mu = 0, sigma = 1. Inside an active hint region mu is the
// hint value.
Tensor analytic_eps(const EstimatorRequest& req, const NoiseSchedule& sched);

struct MixtureComponent {
  double weight = 1.0;
  Tensor mean;   // [C x H x W]
  Tensor sigma;  // [H x W]
};

// Per-pixel (and per-channel) independent mixture prior. The estimate is
// the responsibility-weighted sum of the single-component predictors, with
// responsibilities taken under each component's noised marginal.
Tensor analytic_mixture_eps(const EstimatorRequest& req, const std::vector<MixtureComponent>& components,
                            const NoiseSchedule& sched);

class AnalyticEstimator final : public NoiseEstimator {
 public:
  explicit AnalyticEstimator(NoiseSchedule schedule) : schedule_(std::move(schedule)) {}
  Tensor estimate(const EstimatorRequest& req) const override { return analytic_eps(req, schedule_); }
  std::string_view name() const override { return "analytic"; }
  const NoiseSchedule& schedule() const noexcept { return schedule_; }

 private:
  NoiseSchedule schedule_;
};

}  // namespace noisecollage
