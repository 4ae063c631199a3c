#pragma once

#include <cstdint>

#include "noisecollage/tensor.hpp"

namespace noisecollage {

// Counter-based Gaussian source. Every draw is a pure function of
// (seed, stream, t, index), so draws can be produced in any order or on
// any thread without changing their values.
//
// Stream 0 is reserved for the sampler: t = 0 holds the initial noise
// image x_T and t >= 1 holds the ancestral noise injected at step t.
class NoiseSource {
 public:
  static constexpr std::uint64_t kSamplerStream = 0;
  static constexpr std::uint64_t kInitialNoiseStep = 0;

  explicit NoiseSource(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Raw 64 random bits for counter position (stream, t, counter).
  std::uint64_t bits(std::uint64_t stream, std::uint64_t t, std::uint64_t counter) const noexcept;

  // Uniform in (0, 1].
  double uniform(std::uint64_t stream, std::uint64_t t, std::uint64_t counter) const noexcept;

  // Standard normal draw number `index` of (stream, t). Box-Muller over the
  // uniform pair (2k, 2k+1) with k = index / 2; even indices take the
  // cosine branch, odd indices the sine branch.
  double gaussian(std::uint64_t stream, std::uint64_t t, std::uint64_t index) const noexcept;

  // Tensor of shape `shape` whose flat element i is gaussian(stream, t, i).
  Tensor fill(std::uint64_t stream, std::uint64_t t, const Shape& shape) const;

 private:
  std::uint64_t seed_;
};

}  // namespace noisecollage
