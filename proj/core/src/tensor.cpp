#include "noisecollage/tensor.hpp"

#include <cmath>
#include <sstream>

#include "noisecollage/error.hpp"

namespace noisecollage {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_volume(const Shape& shape) {
  std::size_t volume = 1;
  for (auto e : shape) volume *= e;
  return volume;
}

namespace {
void check_extents(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) throw Error(ErrorKind::kShape, "zero extent in shape " + shape_string(shape));
  }
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(shape_volume(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_extents(shape_);
  if (shape_volume(shape_) != values_.size()) {
    throw Error(ErrorKind::kShape, "shape " + shape_string(shape_) + " does not hold " +
                                       std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorKind::kShape, "ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), values_);
}

bool Tensor::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool operator==(const Tensor& a, const Tensor& b) noexcept {
  return a.shape_ == b.shape_ && a.values_ == b.values_;
}

}  // namespace noisecollage
