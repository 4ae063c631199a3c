#include "noisecollage/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisecollage/error.hpp"

namespace noisecollage {

Mask::Mask(std::size_t height, std::size_t width, bool fill)
    : height_(height), width_(width), bits_(height * width, fill ? 1 : 0) {}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

std::string size_string(CanvasSize s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width);
}

Mask rasterize_box(const Box& box, CanvasSize canvas) {
  if (!(box.x0 < box.x1) || !(box.y0 < box.y1)) {
    throw Error(ErrorKind::kDegenerateRegion, "box requires x0 < x1 and y0 < y1");
  }
  const double w = static_cast<double>(canvas.width), h = static_cast<double>(canvas.height);
  const double x0 = std::clamp(box.x0, 0.0, w), x1 = std::clamp(box.x1, 0.0, w);
  const double y0 = std::clamp(box.y0, 0.0, h), y1 = std::clamp(box.y1, 0.0, h);
  Mask mask(canvas.height, canvas.width);
  for (std::size_t y = 0; y < canvas.height; ++y) {
    const double cy = static_cast<double>(y) + 0.5;
    if (cy < y0 || cy >= y1) continue;
    for (std::size_t x = 0; x < canvas.width; ++x) {
      const double cx = static_cast<double>(x) + 0.5;
      if (cx >= x0 && cx < x1) mask.set(x, y);
    }
  }
  return mask;
}

// Even-odd crossing test against the horizontal ray to +x.
bool inside_even_odd(const std::vector<Point>& v, double px, double py) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Point& a = v[i];
    const Point& b = v[j];
    if ((a.y > py) != (b.y > py)) {
      const double xcross = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
      if (px < xcross) inside = !inside;
    }
  }
  return inside;
}

Mask rasterize_polygon(const Polygon& poly, CanvasSize canvas) {
  if (poly.vertices.size() < 3) {
    throw Error(ErrorKind::kDegenerateRegion, "polygon requires at least 3 vertices");
  }
  for (const auto& p : poly.vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::kDegenerateRegion, "polygon vertex is not finite");
    }
  }
  Mask mask(canvas.height, canvas.width);
  for (std::size_t y = 0; y < canvas.height; ++y)
    for (std::size_t x = 0; x < canvas.width; ++x)
      if (inside_even_odd(poly.vertices, static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5))
        mask.set(x, y);
  return mask;
}

}  // namespace

Mask rasterize(const RegionSpec& region, CanvasSize canvas) {
  if (canvas.height == 0 || canvas.width == 0) throw Error(ErrorKind::kShape, "empty canvas");
  Mask mask = std::visit(
      [&](const auto& r) {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, Box>) {
          return rasterize_box(r, canvas);
        } else {
          return rasterize_polygon(r, canvas);
        }
      },
      region);
  if (mask.count() == 0) {
    throw Error(ErrorKind::kDegenerateRegion, "region covers no pixel centre on a " + size_string(canvas) + " canvas");
  }
  return mask;
}

Mask downsample(const Mask& mask, CanvasSize target) {
  if (target.height == 0 || target.width == 0 || mask.height() % target.height != 0 ||
      mask.width() % target.width != 0) {
    throw Error(ErrorKind::kShape, "cannot block-reduce " + size_string(mask.size()) + " to " + size_string(target));
  }
  const std::size_t bh = mask.height() / target.height, bw = mask.width() / target.width;
  const std::size_t block = bh * bw;
  Mask out(target.height, target.width);
  for (std::size_t ty = 0; ty < target.height; ++ty)
    for (std::size_t tx = 0; tx < target.width; ++tx) {
      std::size_t n = 0;
      for (std::size_t dy = 0; dy < bh; ++dy)
        for (std::size_t dx = 0; dx < bw; ++dx) n += mask.get(tx * bw + dx, ty * bh + dy);
      // n / block >= 1/2 without floating point.
      if (2 * n >= block) out.set(tx, ty);
    }
  return out;
}

std::vector<std::size_t> mask_to_rows(const Mask& mask) {
  std::vector<std::size_t> rows;
  rows.reserve(mask.count());
  for (std::size_t i = 0; i < mask.pixel_count(); ++i)
    if (mask.at_index(i)) rows.push_back(i);
  return rows;
}

Coverage coverage_check(const std::vector<Mask>& masks, CanvasSize canvas) {
  for (const auto& m : masks) {
    if (m.size() != canvas) {
      throw Error(ErrorKind::kShape, "mask " + size_string(m.size()) + " on canvas " + size_string(canvas));
    }
  }
  Coverage result;
  const std::size_t pixels = canvas.height * canvas.width;
  for (std::size_t i = 0; i < pixels; ++i) {
    const bool hit = std::any_of(masks.begin(), masks.end(), [i](const Mask& m) { return m.at_index(i); });
    if (!hit) ++result.uncovered_count;
  }
  result.covered = result.uncovered_count == 0;
  return result;
}

std::vector<CanvasSize> default_pyramid_levels(CanvasSize canvas, std::size_t max_levels) {
  std::vector<CanvasSize> levels;
  CanvasSize s = canvas;
  while (levels.size() < max_levels && s.height % 2 == 0 && s.width % 2 == 0 && s.height > 1 && s.width > 1) {
    s = {s.height / 2, s.width / 2};
    levels.push_back(s);
  }
  return levels;
}

MaskPyramid::MaskPyramid(const Mask& canvas_mask, const std::vector<CanvasSize>& levels)
    : canvas_size_(canvas_mask.size()) {
  levels_.emplace(canvas_size_, canvas_mask);
  for (const auto& lv : levels) {
    if (!levels_.contains(lv)) levels_.emplace(lv, downsample(canvas_mask, lv));
  }
}

const Mask& MaskPyramid::canvas() const { return level(canvas_size_); }

const Mask& MaskPyramid::level(CanvasSize size) const {
  auto it = levels_.find(size);
  if (it == levels_.end()) {
    throw Error(ErrorKind::kConfig, "mask pyramid has no " + size_string(size) + " level");
  }
  return it->second;
}

}  // namespace noisecollage
