#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "noisecollage/geometry.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

inline constexpr std::size_t kVocabularySize = 64;
inline constexpr std::size_t kMaxTokens = 8;

// Unconditional branch: prior N(0, 1) for the analytic backend, the null
// token for the UNet.
struct EmptyCondition {
  friend bool operator==(const EmptyCondition&, const EmptyCondition&) = default;
};

// Per-pixel Gaussian data prior N(mean[c, y, x], sigma[y, x]^2).
struct AnalyticCondition {
  Tensor mean;   // [C x H x W]
  Tensor sigma;  // [H x W], >= 0

  // Spatially constant target: mean[c] everywhere, one sigma.
  static AnalyticCondition uniform(const std::vector<double>& channel_means, double sigma,
                                   CanvasSize canvas);

  friend bool operator==(const AnalyticCondition&, const AnalyticCondition&) = default;
};

struct TokenCondition {
  std::vector<std::size_t> ids;  // at most kMaxTokens, each < kVocabularySize
  friend bool operator==(const TokenCondition&, const TokenCondition&) = default;
};

using Condition = std::variant<EmptyCondition, AnalyticCondition, TokenCondition>;

bool is_empty(const Condition& c);
bool is_analytic(const Condition& c);
bool is_tokens(const Condition& c);

// Throws a config error when a condition breaks its invariants or does not
// fit a C x H x W canvas.
void validate_condition(const Condition& c, std::size_t channels, CanvasSize canvas);

// Spatial side-condition. Analytic backends read `values` as the target
// mean inside `active`; the UNet reads them as extra input channels.
struct HintMap {
  Tensor values;  // [C x H x W]
  Mask active;

  friend bool operator==(const HintMap&, const HintMap&) = default;
};

// Union of hints. Where active regions overlap the lowest-index hint wins.
// Returns nullopt for an empty list.
std::optional<HintMap> merge_hints(const std::vector<const HintMap*>& hints);

}  // namespace noisecollage
