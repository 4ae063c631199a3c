#include "noisecollage/noise.hpp"

#include <cmath>
#include <numbers>

namespace noisecollage {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t NoiseSource::bits(std::uint64_t stream, std::uint64_t t, std::uint64_t counter) const noexcept {
  std::uint64_t h = mix64(seed_);
  h = mix64(h ^ stream);
  h = mix64(h ^ (t * 0xd1b54a32d192ed03ULL));
  return mix64(h ^ counter);
}

double NoiseSource::uniform(std::uint64_t stream, std::uint64_t t, std::uint64_t counter) const noexcept {
  return static_cast<double>((bits(stream, t, counter) >> 11) + 1) * 0x1.0p-53;
}

double NoiseSource::gaussian(std::uint64_t stream, std::uint64_t t, std::uint64_t index) const noexcept {
  const std::uint64_t pair = index / 2;
  const double u1 = uniform(stream, t, 2 * pair);
  const double u2 = uniform(stream, t, 2 * pair + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

Tensor NoiseSource::fill(std::uint64_t stream, std::uint64_t t, const Shape& shape) const {
  Tensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gaussian(stream, t, i);
  return out;
}

}  // namespace noisecollage
