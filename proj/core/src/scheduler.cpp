#include "noisecollage/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage {

void NoiseSchedule::check_step(std::size_t t) const {
  if (t < 1 || t > steps()) {
    throw Error(ErrorKind::kIndex, "timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
  }
}

double NoiseSchedule::beta(std::size_t t) const {
  check_step(t);
  return beta_[t - 1];
}

double NoiseSchedule::alpha(std::size_t t) const {
  check_step(t);
  return alpha_[t - 1];
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
  if (t == 0) return 1.0;
  check_step(t);
  return alpha_bar_[t - 1];
}

double NoiseSchedule::sqrt_alpha_bar(std::size_t t) const {
  if (t == 0) return 1.0;
  check_step(t);
  return sqrt_ab_[t - 1];
}

double NoiseSchedule::sqrt_one_minus_alpha_bar(std::size_t t) const {
  if (t == 0) return 0.0;
  check_step(t);
  return sqrt_1mab_[t - 1];
}

std::size_t NoiseSchedule::train_timestep(std::size_t t) const {
  check_step(t);
  return train_t_[t - 1];
}

NoiseSchedule make_schedule(std::size_t steps) {
  if (steps < 1) throw Error(ErrorKind::kConfig, "schedule needs at least one step");
  const std::size_t train = std::max(kTrainSteps, steps);
  std::vector<double> train_beta(train);
  for (std::size_t i = 0; i < train; ++i) {
    train_beta[i] = train == 1 ? kBetaStart
                               : kBetaStart + (kBetaEnd - kBetaStart) * static_cast<double>(i) /
                                                  static_cast<double>(train - 1);
  }
  const std::size_t stride = train / steps;

  NoiseSchedule s;
  double running = 1.0;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t ts = k * stride;
    const std::size_t first = k == 0 ? 0 : prev + 1;
    double alpha = 1.0;
    for (std::size_t i = first; i <= ts; ++i) alpha *= 1.0 - train_beta[i];
    running *= alpha;
    s.train_t_.push_back(ts);
    s.alpha_.push_back(alpha);
    s.beta_.push_back(1.0 - alpha);
    s.alpha_bar_.push_back(running);
    s.sqrt_ab_.push_back(std::sqrt(running));
    s.sqrt_1mab_.push_back(std::sqrt(1.0 - running));
    prev = ts;
  }
  return s;
}

std::string_view to_string(StepKind kind) {
  return kind == StepKind::kDdim ? "ddim" : "ancestral";
}

StepKind parse_step_kind(std::string_view name) {
  if (name == "ddim") return StepKind::kDdim;
  if (name == "ancestral" || name == "ddpm") return StepKind::kAncestral;
  throw Error(ErrorKind::kConfig, "unknown step kind '" + std::string(name) + "'");
}

Tensor add_noise(const Tensor& x0, const Tensor& eps, std::size_t t, const NoiseSchedule& sched) {
  sched.check_step(t);
  if (x0.shape() != eps.shape()) {
    throw Error(ErrorKind::kShape, "add_noise: " + shape_string(x0.shape()) + " vs " + shape_string(eps.shape()));
  }
  const double a = sched.sqrt_alpha_bar(t), b = sched.sqrt_one_minus_alpha_bar(t);
  Tensor out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x0[i] + b * eps[i];
  return out;
}

Tensor step(const Tensor& x_t, const Tensor& eps_hat, std::size_t t, const NoiseSchedule& sched,
            StepKind kind, const NoiseSource* noise) {
  sched.check_step(t);
  if (x_t.shape() != eps_hat.shape()) {
    throw Error(ErrorKind::kShape, "step: " + shape_string(x_t.shape()) + " vs " + shape_string(eps_hat.shape()));
  }
  const double sab = sched.sqrt_alpha_bar(t), s1mab = sched.sqrt_one_minus_alpha_bar(t);
  const double sab_prev = sched.sqrt_alpha_bar(t - 1), s1mab_prev = sched.sqrt_one_minus_alpha_bar(t - 1);
  Tensor out(x_t.shape());

  if (kind == StepKind::kDdim) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x0_hat = (x_t[i] - s1mab * eps_hat[i]) / sab;
      out[i] = sab_prev * x0_hat + s1mab_prev * eps_hat[i];
    }
    return out;
  }

  const double ab = sched.alpha_bar(t), ab_prev = sched.alpha_bar(t - 1);
  const double beta = sched.beta(t), alpha = sched.alpha(t);
  const double coef_x0 = sab_prev * beta / (1.0 - ab);
  const double coef_xt = std::sqrt(alpha) * (1.0 - ab_prev) / (1.0 - ab);
  const double sigma = t == 1 ? 0.0 : std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab));
  if (sigma > 0.0 && noise == nullptr) {
    throw Error(ErrorKind::kConfig, "ancestral step needs a noise source");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x0_hat = (x_t[i] - s1mab * eps_hat[i]) / sab;
    double v = coef_x0 * x0_hat + coef_xt * x_t[i];
    if (sigma > 0.0) v += sigma * noise->gaussian(NoiseSource::kSamplerStream, t, i);
    out[i] = v;
  }
  return out;
}

Tensor cfg_combine(const Tensor& eps_uncond, const Tensor& eps_cond, double g) {
  if (eps_uncond.shape() != eps_cond.shape()) {
    throw Error(ErrorKind::kShape,
                "cfg_combine: " + shape_string(eps_uncond.shape()) + " vs " + shape_string(eps_cond.shape()));
  }
  // The endpoints are returned as-is; u + (c - u) is not always c in floating point.
  if (g == 0.0) return eps_uncond;
  if (g == 1.0) return eps_cond;
  Tensor out(eps_cond.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps_uncond[i] + g * (eps_cond[i] - eps_uncond[i]);
  return out;
}

}  // namespace noisecollage
