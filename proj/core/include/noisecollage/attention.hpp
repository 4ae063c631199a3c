#pragma once

#include <cstddef>
#include <vector>

#include "noisecollage/tensor.hpp"

namespace noisecollage {

// softmax(Q K^T / sqrt(d)) V for Q: [R x d], K, V: [M x d].
Tensor cross_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// Attention weights softmax(Q K^T / sqrt(d)), [R x M].
Tensor attention_weights(const Tensor& q, const Tensor& k);

enum class MaskedAttentionMode {
  // Each branch's output is kept only on its own rows, so object tokens
  // never reach rows outside the region and global tokens never reach rows
  // inside it.
  kRowSelect,
  // Zero the complementary query rows, attend, and add both branch
  // outputs unmodified. A zeroed query row attends uniformly, so each
  // branch leaks its mean value row into the other region.
  kLiteralSum,
};

// Rows listed in `object_rows` attend to the object tokens (k_obj, v_obj);
// every other row attends to the global tokens (k_glob, v_glob). Throws an
// index error for a row index >= R.
Tensor masked_cross_attention(const Tensor& q, const std::vector<std::size_t>& object_rows,
                              const Tensor& k_obj, const Tensor& v_obj, const Tensor& k_glob,
                              const Tensor& v_glob,
                              MaskedAttentionMode mode = MaskedAttentionMode::kRowSelect);

}  // namespace noisecollage
