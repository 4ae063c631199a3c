#include "noisecollage/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "noisecollage/error.hpp"

namespace noisecollage::numerics {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw Error(ErrorKind::kShape, std::string(what) + " expects rank " + std::to_string(rank) +
                                       ", got " + shape_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorKind::kShape, std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                                       shape_string(b.shape()));
  }
}

template <typename Fn>
Tensor zip(const Tensor& a, const Tensor& b, const char* what, Fn fn) {
  require_same_shape(a, b, what);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i], b[i]);
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t r = a.extent(0), k = a.extent(1), c = b.extent(1);
  if (b.extent(0) != k) {
    throw Error(ErrorKind::kShape,
                "matmul inner extents: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor out({r, c});
  for (std::size_t i = 0; i < r; ++i) {
    double* row = out.data() + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a.at(i, p);
      const double* brow = b.data() + p * c;
      for (std::size_t j = 0; j < c; ++j) row[j] += aip * brow[j];
    }
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.extent(0), c = a.extent(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  require_rank(a, 2, "softmax_rows");
  const std::size_t r = a.extent(0), c = a.extent(1);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < r; ++i) {
    const double* in = a.data() + i * c;
    double* o = out.data() + i * c;
    const double mx = *std::max_element(in, in + c);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= sum;
  }
  return out;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias) {
  require_rank(x, 3, "conv2d input");
  require_rank(w, 4, "conv2d kernel");
  const std::size_t cin = x.extent(0), h = x.extent(1), wd = x.extent(2);
  const std::size_t cout = w.extent(0);
  if (w.extent(1) != cin || w.extent(2) != 3 || w.extent(3) != 3) {
    throw Error(ErrorKind::kShape, "conv2d kernel " + shape_string(w.shape()) +
                                       " does not match input " + shape_string(x.shape()));
  }
  if (bias.size() != cout) {
    throw Error(ErrorKind::kShape, "conv2d bias " + shape_string(bias.shape()));
  }
  Tensor out({cout, h, wd});
  for (std::size_t o = 0; o < cout; ++o) {
    double* plane = out.data() + o * h * wd;
    std::fill(plane, plane + h * wd, bias[o]);
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* src = x.data() + ci * h * wd;
      const double* k = w.data() + (o * cin + ci) * 9;
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < wd; ++xx) {
          double acc = 0.0;
          for (int dy = -1; dy <= 1; ++dy) {
            const auto sy = static_cast<std::ptrdiff_t>(y) + dy;
            if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const auto sx = static_cast<std::ptrdiff_t>(xx) + dx;
              if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(wd)) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * src[sy * static_cast<std::ptrdiff_t>(wd) + sx];
            }
          }
          plane[y * wd + xx] += acc;
        }
      }
    }
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  require_rank(x, 2, "layer_norm");
  const std::size_t rows = x.extent(0), d = x.extent(1);
  if (gain.size() != d || shift.size() != d) {
    throw Error(ErrorKind::kShape, "layer_norm affine parameters must have extent " + std::to_string(d));
  }
  if (!(eps > 0.0)) throw Error(ErrorKind::kConfig, "layer_norm eps must be positive");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const double* in = x.data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += in[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    double* o = out.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) o[j] = (in[j] - mean) * inv * gain[j] + shift[j];
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, "add", [](double u, double v) { return u + v; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, "sub", [](double u, double v) { return u - v; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, "mul", [](double u, double v) { return u * v; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i] == 0.0) throw Error(ErrorKind::kDivision, "zero divisor at flat index " + std::to_string(i));
  }
  return zip(a, b, "div", [](double u, double v) { return u / v; });
}

Tensor scale(const Tensor& a, double s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

Tensor silu(const Tensor& a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] / (1.0 + std::exp(-a[i]));
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  Tensor out = matmul(x, w);
  const std::size_t c = out.extent(1);
  if (bias.size() != c) throw Error(ErrorKind::kShape, "linear bias " + shape_string(bias.shape()));
  for (std::size_t i = 0; i < out.extent(0); ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(i, j) += bias[j];
  return out;
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  require_rank(x, 3, "add_channel_bias");
  const std::size_t ch = x.extent(0), plane = x.extent(1) * x.extent(2);
  if (bias.size() != ch) throw Error(ErrorKind::kShape, "channel bias " + shape_string(bias.shape()));
  Tensor out = x;
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t p = 0; p < plane; ++p) out[c * plane + p] += bias[c];
  return out;
}

Tensor avg_pool2(const Tensor& x) {
  require_rank(x, 3, "avg_pool2");
  const std::size_t ch = x.extent(0), h = x.extent(1), w = x.extent(2);
  if (h % 2 || w % 2) throw Error(ErrorKind::kShape, "avg_pool2 needs even extents, got " + shape_string(x.shape()));
  Tensor out({ch, h / 2, w / 2});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t y = 0; y < h / 2; ++y)
      for (std::size_t xx = 0; xx < w / 2; ++xx) {
        const double s = x.at(c, 2 * y, 2 * xx) + x.at(c, 2 * y, 2 * xx + 1) +
                         x.at(c, 2 * y + 1, 2 * xx) + x.at(c, 2 * y + 1, 2 * xx + 1);
        out.at(c, y, xx) = 0.25 * s;
      }
  return out;
}

Tensor upsample_nearest2(const Tensor& x) {
  require_rank(x, 3, "upsample_nearest2");
  const std::size_t ch = x.extent(0), h = x.extent(1), w = x.extent(2);
  Tensor out({ch, 2 * h, 2 * w});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx) out.at(c, y, xx) = x.at(c, y / 2, xx / 2);
  return out;
}

Tensor image_to_rows(const Tensor& x) {
  require_rank(x, 3, "image_to_rows");
  const std::size_t ch = x.extent(0), plane = x.extent(1) * x.extent(2);
  Tensor out({plane, ch});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t p = 0; p < plane; ++p) out.at(p, c) = x[c * plane + p];
  return out;
}

Tensor rows_to_image(const Tensor& rows, std::size_t height, std::size_t width) {
  require_rank(rows, 2, "rows_to_image");
  const std::size_t plane = rows.extent(0), ch = rows.extent(1);
  if (plane != height * width) {
    throw Error(ErrorKind::kShape, "rows_to_image: " + std::to_string(plane) + " rows for " +
                                       std::to_string(height) + "x" + std::to_string(width));
  }
  Tensor out({ch, height, width});
  for (std::size_t c = 0; c < ch; ++c)
    for (std::size_t p = 0; p < plane; ++p) out[c * plane + p] = rows.at(p, c);
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "concat_channels");
  require_rank(b, 3, "concat_channels");
  if (a.extent(1) != b.extent(1) || a.extent(2) != b.extent(2)) {
    throw Error(ErrorKind::kShape, "concat_channels: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  std::vector<double> values(a.values().begin(), a.values().end());
  values.insert(values.end(), b.values().begin(), b.values().end());
  return Tensor({a.extent(0) + b.extent(0), a.extent(1), a.extent(2)}, std::move(values));
}

}  // namespace noisecollage::numerics
