#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace noisecollage {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_volume(const Shape& shape);

// Dense row-major array of doubles. Images are C x H x W, attention
// operands are rows x d.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  // Unchecked 2-D and 3-D accessors.
  double& at(std::size_t r, std::size_t c) noexcept { return values_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const noexcept { return values_[r * shape_[1] + c]; }
  double& at(std::size_t c, std::size_t y, std::size_t x) noexcept {
    return values_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return values_[(c * shape_[1] + y) * shape_[2] + x];
  }

  // Reinterpret with a new shape of equal volume.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

  // Exact elementwise equality (shape and every value compared with ==).
  friend bool operator==(const Tensor& a, const Tensor& b) noexcept;

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace noisecollage
