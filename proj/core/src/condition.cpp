#include "noisecollage/condition.hpp"

#include <cmath>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage {

AnalyticCondition AnalyticCondition::uniform(const std::vector<double>& channel_means, double sigma,
                                             CanvasSize canvas) {
  if (channel_means.empty()) throw Error(ErrorKind::kConfig, "analytic condition needs at least one channel mean");
  AnalyticCondition c{Tensor({channel_means.size(), canvas.height, canvas.width}),
                      Tensor({canvas.height, canvas.width}, sigma)};
  const std::size_t plane = canvas.height * canvas.width;
  for (std::size_t ch = 0; ch < channel_means.size(); ++ch)
    for (std::size_t p = 0; p < plane; ++p) c.mean[ch * plane + p] = channel_means[ch];
  return c;
}

bool is_empty(const Condition& c) { return std::holds_alternative<EmptyCondition>(c); }
bool is_analytic(const Condition& c) { return std::holds_alternative<AnalyticCondition>(c); }
bool is_tokens(const Condition& c) { return std::holds_alternative<TokenCondition>(c); }

void validate_condition(const Condition& c, std::size_t channels, CanvasSize canvas) {
  if (const auto* a = std::get_if<AnalyticCondition>(&c)) {
    const Shape mean_shape{channels, canvas.height, canvas.width};
    const Shape sigma_shape{canvas.height, canvas.width};
    if (a->mean.shape() != mean_shape || a->sigma.shape() != sigma_shape) {
      throw Error(ErrorKind::kConfig, "analytic condition fields " + shape_string(a->mean.shape()) + "/" +
                                          shape_string(a->sigma.shape()) + " do not fit canvas " +
                                          shape_string(mean_shape));
    }
    if (!a->mean.all_finite()) throw Error(ErrorKind::kConfig, "analytic mean is not finite");
    for (double s : a->sigma.values()) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::kConfig, "analytic sigma must be finite and >= 0");
    }
  } else if (const auto* t = std::get_if<TokenCondition>(&c)) {
    if (t->ids.size() > kMaxTokens) {
      throw Error(ErrorKind::kConfig, "at most " + std::to_string(kMaxTokens) + " tokens per condition");
    }
    for (auto id : t->ids) {
      if (id >= kVocabularySize) {
        throw Error(ErrorKind::kConfig, "token id " + std::to_string(id) + " outside vocabulary of " +
                                            std::to_string(kVocabularySize));
      }
    }
  }
}

std::optional<HintMap> merge_hints(const std::vector<const HintMap*>& hints) {
  if (hints.empty()) return std::nullopt;
  HintMap merged{Tensor(hints.front()->values.shape()), Mask(hints.front()->active.height(), hints.front()->active.width())};
  const std::size_t channels = merged.values.extent(0);
  const std::size_t plane = merged.active.pixel_count();
  for (const HintMap* h : hints) {
    if (h->values.shape() != merged.values.shape() || h->active.size() != merged.active.size()) {
      throw Error(ErrorKind::kShape, "hints disagree on shape");
    }
    for (std::size_t p = 0; p < plane; ++p) {
      if (!h->active.at_index(p) || merged.active.at_index(p)) continue;
      merged.active.set_index(p);
      for (std::size_t c = 0; c < channels; ++c) merged.values[c * plane + p] = h->values[c * plane + p];
    }
  }
  return merged;
}

}  // namespace noisecollage
