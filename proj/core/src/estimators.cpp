#include "noisecollage/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "noisecollage/error.hpp"

namespace noisecollage {

namespace {

struct PixelPrior {
  const Tensor* mean = nullptr;   // null: zero mean
  const Tensor* sigma = nullptr;  // null: unit sigma
};

void check_request(const EstimatorRequest& req, const NoiseSchedule& sched) {
  if (req.x_t == nullptr) throw Error(ErrorKind::kConfig, "estimator request without x_t");
  if (req.x_t->rank() != 3) throw Error(ErrorKind::kShape, "x_t must be C x H x W");
  sched.check_step(req.t);
  if (req.hint) {
    if (req.hint->values.shape() != req.x_t->shape()) {
      throw Error(ErrorKind::kShape, "hint " + shape_string(req.hint->values.shape()) + " vs x_t " +
                                         shape_string(req.x_t->shape()));
    }
    if (req.hint->active.height() != req.x_t->extent(1) || req.hint->active.width() != req.x_t->extent(2)) {
      throw Error(ErrorKind::kShape, "hint mask does not match the canvas");
    }
  }
}

void check_field_shapes(const Tensor& mean, const Tensor& sigma, const Tensor& x) {
  if (mean.shape() != x.shape() || sigma.rank() != 2 || sigma.extent(0) != x.extent(1) ||
      sigma.extent(1) != x.extent(2)) {
    throw Error(ErrorKind::kShape, "analytic fields " + shape_string(mean.shape()) + "/" +
                                       shape_string(sigma.shape()) + " vs x_t " + shape_string(x.shape()));
  }
}

PixelPrior prior_of(const EstimatorRequest& req) {
  if (req.condition == nullptr || is_empty(*req.condition)) return {};
  if (const auto* a = std::get_if<AnalyticCondition>(req.condition)) {
    check_field_shapes(a->mean, a->sigma, *req.x_t);
    return {&a->mean, &a->sigma};
  }
  throw Error(ErrorKind::kConfig, "analytic estimator needs an analytic or empty condition");
}

// Mean at flat index i, honouring the hint override.
double mean_at(const EstimatorRequest& req, const Tensor* mean, std::size_t i, std::size_t p) {
  if (req.hint && req.hint->active.at_index(p)) return req.hint->values[i];
  return mean ? (*mean)[i] : 0.0;
}

}  // namespace

Tensor analytic_eps(const EstimatorRequest& req, const NoiseSchedule& sched) {
  check_request(req, sched);
  const PixelPrior prior = prior_of(req);
  const Tensor& x = *req.x_t;
  const double ab = sched.alpha_bar(req.t);
  const double sab = sched.sqrt_alpha_bar(req.t);
  const double s1mab = sched.sqrt_one_minus_alpha_bar(req.t);
  const std::size_t channels = x.extent(0), plane = x.extent(1) * x.extent(2);

  Tensor out(x.shape());
  for (std::size_t p = 0; p < plane; ++p) {
    const double sigma = prior.sigma ? (*prior.sigma)[p] : 1.0;
    const double var = ab * sigma * sigma + (1.0 - ab);
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = c * plane + p;
      out[i] = s1mab * (x[i] - sab * mean_at(req, prior.mean, i, p)) / var;
    }
  }
  return out;
}

Tensor analytic_mixture_eps(const EstimatorRequest& req, const std::vector<MixtureComponent>& components,
                            const NoiseSchedule& sched) {
  if (components.empty()) throw Error(ErrorKind::kConfig, "mixture needs at least one component");
  check_request(req, sched);
  const Tensor& x = *req.x_t;
  double total = 0.0;
  for (const auto& comp : components) {
    if (!(comp.weight > 0.0)) throw Error(ErrorKind::kConfig, "mixture weights must be positive");
    check_field_shapes(comp.mean, comp.sigma, x);
    total += comp.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorKind::kConfig, "mixture weights must sum to 1");

  const double ab = sched.alpha_bar(req.t);
  const double sab = sched.sqrt_alpha_bar(req.t);
  const double s1mab = sched.sqrt_one_minus_alpha_bar(req.t);
  const std::size_t channels = x.extent(0), plane = x.extent(1) * x.extent(2);
  const std::size_t k_count = components.size();

  Tensor out(x.shape());
  std::vector<double> log_resp(k_count), eps_k(k_count);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = c * plane + p;
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < k_count; ++k) {
        const auto& comp = components[k];
        const double sigma = comp.sigma[p];
        const double var = ab * sigma * sigma + (1.0 - ab);
        const double centred = x[i] - sab * mean_at(req, &comp.mean, i, p);
        eps_k[k] = s1mab * centred / var;
        log_resp[k] = std::log(comp.weight) - 0.5 * std::log(var) - 0.5 * centred * centred / var;
        top = std::max(top, log_resp[k]);
      }
      if (k_count == 1) {
        out[i] = eps_k[0];
        continue;
      }
      double norm = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) norm += std::exp(log_resp[k] - top);
      double acc = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) acc += std::exp(log_resp[k] - top) / norm * eps_k[k];
      out[i] = acc;
    }
  }
  return out;
}

}  // namespace noisecollage
