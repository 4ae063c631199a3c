#pragma once

#include <vector>

#include "noisecollage/geometry.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

inline constexpr double kDefaultAlpha = 0.1;

struct MergeConfig {
  // Weight of the global noise inside object regions. Zero is only valid
  // when the masks jointly cover the canvas.
  double alpha = kDefaultAlpha;
};

// Crop-and-merge of per-object noises. For every channel c and pixel p:
//
//   eps[c,p] = (sum_n mask_n[p] * eps_n[c,p] + alpha * eps_global[c,p])
//            / (sum_n mask_n[p] + alpha)
//
// The sum runs over objects in ascending index order. Pixels outside every
// mask return eps_global bit-exactly, and N = 0 returns eps_global.
//
// Throws a shape error on mismatched operands and a merge-config error
// (naming the first uncovered pixel) when alpha == 0 leaves a pixel with a
// zero denominator.
Tensor merge_noises(const std::vector<Tensor>& eps_objects, const std::vector<Mask>& masks,
                    const Tensor& eps_global, const MergeConfig& cfg);

}  // namespace noisecollage
