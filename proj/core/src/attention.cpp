#include "noisecollage/attention.hpp"

#include <cmath>
#include <string>

#include "noisecollage/error.hpp"
#include "noisecollage/numerics.hpp"

namespace noisecollage {

namespace {

void check_operands(const Tensor& q, const Tensor& k, const Tensor& v) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) {
    throw Error(ErrorKind::kShape, "attention operands must be matrices");
  }
  if (k.extent(1) != q.extent(1) || v.extent(1) != q.extent(1) || k.extent(0) != v.extent(0)) {
    throw Error(ErrorKind::kShape, "attention operands Q" + shape_string(q.shape()) + " K" +
                                       shape_string(k.shape()) + " V" + shape_string(v.shape()));
  }
}

}  // namespace

Tensor attention_weights(const Tensor& q, const Tensor& k) {
  if (q.rank() != 2 || k.rank() != 2 || q.extent(1) != k.extent(1)) {
    throw Error(ErrorKind::kShape, "attention_weights: Q" + shape_string(q.shape()) + " K" + shape_string(k.shape()));
  }
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.extent(1)));
  return numerics::softmax_rows(numerics::scale(numerics::matmul(q, numerics::transpose(k)), inv_sqrt_d));
}

Tensor cross_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  check_operands(q, k, v);
  return numerics::matmul(attention_weights(q, k), v);
}

Tensor masked_cross_attention(const Tensor& q, const std::vector<std::size_t>& object_rows,
                              const Tensor& k_obj, const Tensor& v_obj, const Tensor& k_glob,
                              const Tensor& v_glob, MaskedAttentionMode mode) {
  check_operands(q, k_obj, v_obj);
  check_operands(q, k_glob, v_glob);
  const std::size_t rows = q.extent(0), d = q.extent(1);
  std::vector<bool> in_region(rows, false);
  for (auto r : object_rows) {
    if (r >= rows) {
      throw Error(ErrorKind::kIndex, "row " + std::to_string(r) + " outside query with " + std::to_string(rows) + " rows");
    }
    in_region[r] = true;
  }

  // Q_n keeps the region rows, Q_nbar = Q - Q_n keeps the rest.
  Tensor q_obj(q.shape()), q_rest(q.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    Tensor& dst = in_region[r] ? q_obj : q_rest;
    for (std::size_t j = 0; j < d; ++j) dst.at(r, j) = q.at(r, j);
  }
  const Tensor out_obj = cross_attention(q_obj, k_obj, v_obj);
  const Tensor out_rest = cross_attention(q_rest, k_glob, v_glob);

  if (mode == MaskedAttentionMode::kLiteralSum) return numerics::add(out_obj, out_rest);

  Tensor out(out_obj.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const Tensor& src = in_region[r] ? out_obj : out_rest;
    for (std::size_t j = 0; j < out.extent(1); ++j) out.at(r, j) = src.at(r, j);
  }
  return out;
}

}  // namespace noisecollage
