#pragma once

#include "noisecollage/tensor.hpp"

// Dense kernels shared by the attention layer, the estimators and the
// sampler. Every kernel uses a fixed loop order, so identical inputs give
// bit-identical outputs, and each output row of a row-wise kernel depends
// only on the matching input row.
namespace noisecollage::numerics {

// [r x k] * [k x c] -> [r x c].
Tensor matmul(const Tensor& a, const Tensor& b);

// [r x c] -> [c x r].
Tensor transpose(const Tensor& a);

// Row-wise softmax with row-max subtraction.
Tensor softmax_rows(const Tensor& a);

// 3x3 cross-correlation with zero padding 1.
// x: [C x H x W], w: [C' x C x 3 x 3], bias: [C'] -> [C' x H x W].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias);

inline constexpr double kLayerNormEps = 1e-5;

// Standardizes each row of [rows x d] then applies gain/shift of extent d.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift,
                  double eps = kLayerNormEps);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Throws a division error naming the first zero in b.
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor silu(const Tensor& a);

// x * w + bias for x: [r x k], w: [k x c], bias: [c].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);

// Adds bias[c] to every pixel of channel c of a [C x H x W] tensor.
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

// 2x2 mean pooling, [C x H x W] -> [C x H/2 x W/2]. H and W must be even.
Tensor avg_pool2(const Tensor& x);

// Nearest-neighbour 2x upsampling, [C x H x W] -> [C x 2H x 2W].
Tensor upsample_nearest2(const Tensor& x);

// Channel-major image [C x H x W] to pixel rows [H*W x C], and back.
Tensor image_to_rows(const Tensor& x);
Tensor rows_to_image(const Tensor& rows, std::size_t height, std::size_t width);

// Concatenate [C1 x H x W] and [C2 x H x W] along channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace noisecollage::numerics
