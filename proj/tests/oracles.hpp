#pragma once

// Brute-force reference implementations used only by the tests. They are
// written independently of the library kernels (different loop structure,
// no shared helpers) so agreement means something.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "noisecollage/geometry.hpp"
#include "noisecollage/tensor.hpp"

namespace noisecollage::testing {

inline Tensor random_tensor(std::mt19937_64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

inline Mask random_mask(std::mt19937_64& rng, std::size_t h, std::size_t w, double p = 0.5) {
  std::bernoulli_distribution bit(p);
  Mask m(h, w);
  for (std::size_t i = 0; i < h * w; ++i) m.set_index(i, bit(rng));
  return m;
}

// Triple loop in i-j-k order with a separate accumulator.
inline std::vector<std::vector<double>> matmul_oracle(const Tensor& a, const Tensor& b) {
  const std::size_t r = a.extent(0), k = a.extent(1), c = b.extent(1);
  std::vector<std::vector<double>> out(r, std::vector<double>(c, 0.0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * c + j];
      out[i][j] = acc;
    }
  return out;
}

// exp / sum without max subtraction.
inline std::vector<double> softmax_oracle(const std::vector<double>& row) {
  std::vector<double> out(row.size());
  double s = 0.0;
  for (double v : row) s += std::exp(v);
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::exp(row[j]) / s;
  return out;
}

// Six nested loops over (o, y, x, ci, ky, kx) with explicit bounds checks.
inline Tensor conv2d_oracle(const Tensor& x, const Tensor& w, const Tensor& bias) {
  const std::size_t cin = x.extent(0), h = x.extent(1), wd = x.extent(2), cout = w.extent(0);
  Tensor out({cout, h, wd});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < wd; ++xx) {
        double acc = bias[o];
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const long sy = static_cast<long>(y) + ky - 1, sx = static_cast<long>(xx) + kx - 1;
              if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(wd)) continue;
              acc += w[((o * cin + ci) * 3 + ky) * 3 + kx] * x[(ci * h + sy) * wd + sx];
            }
        out[(o * h + y) * wd + xx] = acc;
      }
  return out;
}

// PNPOLY even-odd test with a ray towards +x.
inline bool point_in_polygon_oracle(const std::vector<Point>& poly, double px, double py) {
  std::size_t crossings = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point p = poly[i], q = poly[(i + 1) % n];
    const bool straddles = (p.y <= py && q.y > py) || (q.y <= py && p.y > py);
    if (!straddles) continue;
    const double t = (py - p.y) / (q.y - p.y);
    if (px < p.x + t * (q.x - p.x)) ++crossings;
  }
  return crossings % 2 == 1;
}

inline double log_normal_pdf(double x, double mean, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - (x - mean) * (x - mean) / (2.0 * var);
}

// Central difference of a scalar function.
template <typename Fn>
double central_difference(Fn f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace noisecollage::testing
