#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "noisecollage/attention.hpp"
#include "noisecollage/estimators.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage {

namespace unet {

inline constexpr std::size_t kCanvas = 32;
inline constexpr std::size_t kImageChannels = 3;
// Hint channels are always present; zero when the request carries no hint.
inline constexpr std::size_t kHintChannels = 3;
inline constexpr std::size_t kTimeEmbedDim = 32;
inline constexpr std::size_t kStemChannels = 16;
inline constexpr std::size_t kInnerChannels = 32;
inline constexpr std::size_t kAttentionDim = kInnerChannels;
inline constexpr std::size_t kAttentionSide = kCanvas / 2;
// Empty conditions are embedded as this single token.
inline constexpr std::size_t kNullToken = 0;

}  // namespace unet

// Named parameter tensors, kept sorted by name so serialization is canonical.
struct UNetWeights {
  std::map<std::string, Tensor> tensors;

  const Tensor& get(const std::string& name) const;
  friend bool operator==(const UNetWeights&, const UNetWeights&) = default;
};

// Parameter names and shapes of the fixed architecture.
std::vector<std::pair<std::string, Shape>> unet_parameter_layout();

// Seeded initialization. Conv and linear weights are U(-b, b) with
// b = 1 / sqrt(fan_in); the token table is U(-1, 1); biases and norm
// shifts are 0, norm gains are 1.
UNetWeights init_weights(std::uint64_t seed);

// Binary layout, little-endian:
//   "NCUW" | u32 version (=1) | u32 section count
//   per section: u32 name length | name bytes | u32 rank | u64 extents[rank]
//                | f64 values[product(extents)]
// Sections are written in name order.
std::vector<std::uint8_t> save_weights(const UNetWeights& weights);

// Throws a format error carrying the byte offset of the first bad field.
// Nothing is returned on failure.
UNetWeights load_weights(std::span<const std::uint8_t> bytes);

inline constexpr std::uint32_t kWeightFormatVersion = 1;

struct UNetForwardOptions {
  // Use plain cross-attention on the request's condition even when a mask
  // is supplied.
  bool force_standard_attention = false;
  MaskedAttentionMode mode = MaskedAttentionMode::kRowSelect;
  // When set, receives the attention block output as [256 x 32] rows.
  Tensor* attention_tap = nullptr;
};

// Forward-only UNet on a 32 x 32 x 3 canvas:
//   time embedding -> conv stem (6 -> 16) -> residual block @32
//   -> 2x pool + conv (16 -> 32) -> residual block @16
//   -> (masked) cross-attention block @16 -> nearest 2x up + conv (32 -> 16)
//   + skip -> conv head (16 -> 3).
// Object-branch requests attend with the mask pyramid's 16 x 16 level;
// global-branch requests use standard cross-attention.
class UNetEstimator final : public NoiseEstimator {
 public:
  explicit UNetEstimator(UNetWeights weights);

  Tensor estimate(const EstimatorRequest& req) const override;
  std::string_view name() const override { return "unet"; }

  Tensor forward(const EstimatorRequest& req, const UNetForwardOptions& opts) const;

  const UNetWeights& weights() const noexcept { return weights_; }

 private:
  UNetWeights weights_;
};

// Sinusoidal embedding [1 x dim]: first half cos, second half sin of
// t * 10000^(-i / (dim / 2)).
Tensor timestep_embedding(double t, std::size_t dim);

}  // namespace noisecollage
