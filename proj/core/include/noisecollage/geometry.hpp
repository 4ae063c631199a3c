#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <variant>
#include <vector>

namespace noisecollage {

struct CanvasSize {
  std::size_t height = 0;
  std::size_t width = 0;
  friend auto operator<=>(const CanvasSize&, const CanvasSize&) = default;
};

// Half-open box in pixel units: [x0, x1) x [y0, y1).
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct Point {
  double x = 0, y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct Polygon {
  std::vector<Point> vertices;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

using RegionSpec = std::variant<Box, Polygon>;

// Binary mask, row-major.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t height, std::size_t width, bool fill = false);

  static Mask full(CanvasSize size) { return Mask(size.height, size.width, true); }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  CanvasSize size() const noexcept { return {height_, width_}; }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool get(std::size_t x, std::size_t y) const noexcept { return bits_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool on = true) noexcept { bits_[y * width_ + x] = on; }
  bool at_index(std::size_t i) const noexcept { return bits_[i] != 0; }
  void set_index(std::size_t i, bool on = true) noexcept { bits_[i] = on; }

  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Masks of one region at several resolutions. The canvas-resolution mask
// is always present.
class MaskPyramid {
 public:
  MaskPyramid() = default;
  // Builds the canvas level plus each requested level by block reduction.
  MaskPyramid(const Mask& canvas_mask, const std::vector<CanvasSize>& levels);

  const Mask& canvas() const;
  const Mask& level(CanvasSize size) const;
  bool has_level(CanvasSize size) const { return levels_.contains(size); }
  const std::map<CanvasSize, Mask>& levels() const noexcept { return levels_; }
  bool empty() const noexcept { return levels_.empty(); }

 private:
  CanvasSize canvas_size_;
  std::map<CanvasSize, Mask> levels_;
};

// Pixel (x, y) is set iff its centre lies inside the region. Boxes are
// clamped to the canvas first; polygons use the even-odd rule. Throws a
// degenerate-region error when the result is empty or the region is
// malformed.
Mask rasterize(const RegionSpec& region, CanvasSize canvas);

// Block reduction: a target bit is set iff at least half of its source
// block is set.
Mask downsample(const Mask& mask, CanvasSize target);

// Row-major indices (y * width + x) of set pixels, ascending.
std::vector<std::size_t> mask_to_rows(const Mask& mask);

struct Coverage {
  bool covered = false;
  std::size_t uncovered_count = 0;
};

Coverage coverage_check(const std::vector<Mask>& masks, CanvasSize canvas);

// Successive halvings of the canvas while both extents stay even, up to
// max_levels entries. For 32x32 this yields 16x16, 8x8, 4x4.
std::vector<CanvasSize> default_pyramid_levels(CanvasSize canvas, std::size_t max_levels = 3);

}  // namespace noisecollage
