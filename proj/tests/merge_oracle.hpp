#pragma once

#include <vector>

#include "noisecollage/geometry.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage::testing {

// Per-pixel scalar loop of the crop-and-merge blend. Pixels outside every
// mask keep the global value; elsewhere the masked sum in object order plus
// alpha * global, over the mask count plus alpha.
inline double merge_pixel_oracle(const std::vector<Tensor>& objs, const std::vector<Mask>& masks,
                                 const Tensor& glob, double alpha, std::size_t c, std::size_t y,
                                 std::size_t x) {
  double weight = 0.0;
  double acc = 0.0;
  for (std::size_t n = 0; n < objs.size(); ++n) {
    if (!masks[n].get(x, y)) continue;
    weight += 1.0;
    acc += objs[n].at(c, y, x);
  }
  if (weight == 0.0) return glob.at(c, y, x);
  return (acc + alpha * glob.at(c, y, x)) / (weight + alpha);
}

}  // namespace noisecollage::testing
