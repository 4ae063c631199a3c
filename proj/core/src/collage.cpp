#include "noisecollage/collage.hpp"

#include <cmath>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage {

Tensor merge_noises(const std::vector<Tensor>& eps_objects, const std::vector<Mask>& masks,
                    const Tensor& eps_global, const MergeConfig& cfg) {
  if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) {
    throw Error(ErrorKind::kMergeConfig, "alpha must be a finite nonnegative number");
  }
  if (eps_global.rank() != 3) {
    throw Error(ErrorKind::kShape, "global noise must be C x H x W, got " + shape_string(eps_global.shape()));
  }
  if (eps_objects.size() != masks.size()) {
    throw Error(ErrorKind::kShape, std::to_string(eps_objects.size()) + " object noises for " +
                                       std::to_string(masks.size()) + " masks");
  }
  const std::size_t channels = eps_global.extent(0);
  const std::size_t height = eps_global.extent(1), width = eps_global.extent(2);
  const std::size_t plane = height * width;
  for (std::size_t n = 0; n < eps_objects.size(); ++n) {
    if (eps_objects[n].shape() != eps_global.shape()) {
      throw Error(ErrorKind::kShape, "object " + std::to_string(n) + " noise " +
                                         shape_string(eps_objects[n].shape()) + " vs global " +
                                         shape_string(eps_global.shape()));
    }
    if (masks[n].height() != height || masks[n].width() != width) {
      throw Error(ErrorKind::kShape, "object " + std::to_string(n) + " mask is " +
                                         std::to_string(masks[n].height()) + "x" +
                                         std::to_string(masks[n].width()));
    }
  }

  Tensor out = eps_global;
  const double alpha = cfg.alpha;
  for (std::size_t p = 0; p < plane; ++p) {
    std::size_t hits = 0;
    for (const auto& m : masks) hits += m.at_index(p);
    if (hits == 0) {
      if (alpha == 0.0) {
        throw Error(ErrorKind::kMergeConfig, "alpha = 0 but pixel (x=" + std::to_string(p % width) +
                                                 ", y=" + std::to_string(p / width) +
                                                 ") is outside every object mask");
      }
      continue;  // (alpha * g) / alpha would round; the exact value is g.
    }
    const double denom = static_cast<double>(hits) + alpha;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t i = c * plane + p;
      double num = 0.0;
      for (std::size_t n = 0; n < eps_objects.size(); ++n) {
        if (masks[n].at_index(p)) num += eps_objects[n][i];
      }
      num += alpha * eps_global[i];
      out[i] = num / denom;
    }
  }
  return out;
}

}  // namespace noisecollage
