#include "sketchrl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace sketchrl {

namespace {

std::string describe(PixelCoord p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Exact test: squared distance from pixel center p to segment [a, b] <= 1/4.
bool covers(PixelCoord a, PixelCoord b, PixelCoord p) {
  const long long dx = b.x - a.x, dy = b.y - a.y;
  const long long wx = p.x - a.x, wy = p.y - a.y;
  const long long len2 = dx * dx + dy * dy;
  if (len2 == 0) return wx == 0 && wy == 0;
  const long long dot = wx * dx + wy * dy;
  // Outside the projection range the nearest point is an endpoint, and an
  // integer offset is within 1/2 only when it is zero.
  if (dot < 0) return wx == 0 && wy == 0;
  if (dot > len2) return p == b;
  const long long cross = wx * dy - wy * dx;
  return 4 * cross * cross <= len2;
}

}  // namespace

Canvas::Canvas(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("canvas dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  ink_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::uint8_t Canvas::at(PixelCoord p) const {
  if (!contains(p)) throw std::out_of_range("pixel " + describe(p) + " outside canvas");
  return ink_[static_cast<std::size_t>(p.y) * width_ + p.x];
}

void Canvas::set(PixelCoord p, bool inked) {
  if (!contains(p)) throw std::out_of_range("pixel " + describe(p) + " outside canvas");
  ink_[static_cast<std::size_t>(p.y) * width_ + p.x] = inked ? 1 : 0;
}

std::size_t Canvas::ink_count() const {
  return static_cast<std::size_t>(std::count(ink_.begin(), ink_.end(), std::uint8_t{1}));
}

std::uint64_t Canvas::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t byte) {
    h ^= byte;
    h *= 1099511628211ull;
  };
  for (int shift = 0; shift < 32; shift += 8) mix((static_cast<std::uint32_t>(width_) >> shift) & 0xff);
  for (int shift = 0; shift < 32; shift += 8) mix((static_cast<std::uint32_t>(height_) >> shift) & 0xff);
  for (auto c : ink_) mix(c);
  return h;
}

void CanvasMapping::validate() const {
  if (pixels_per_side <= 0) throw std::invalid_argument("pixels_per_side must be positive");
  if (!(centimeters_per_side > 0.0) || !std::isfinite(centimeters_per_side)) {
    throw std::invalid_argument("centimeters_per_side must be positive and finite");
  }
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

PixelCoord physical_to_pixel(const PhysicalCoord& p, const CanvasMapping& m) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
    throw std::invalid_argument("physical_to_pixel: non-finite coordinate");
  }
  const double scale = m.cm_per_pixel();
  const int hi = m.pixels_per_side - 1;
  // Clamp in floating point first so huge values cannot overflow int.
  auto to_index = [&](double cm) {
    const double v = std::clamp(cm / scale, -1.0, static_cast<double>(hi) + 1.0);
    return std::clamp(round_half_up(v), 0, hi);
  };
  return {to_index(p.x), to_index(p.y)};
}

PhysicalCoord pixel_to_physical(PixelCoord px, const CanvasMapping& m) {
  if (px.x < 0 || px.y < 0 || px.x >= m.pixels_per_side || px.y >= m.pixels_per_side) {
    throw std::out_of_range("pixel " + describe(px) + " outside " +
                            std::to_string(m.pixels_per_side) + "-pixel canvas");
  }
  const double scale = m.cm_per_pixel();
  return {px.x * scale, px.y * scale, 0.0};
}

std::vector<PixelCoord> segment_cover(PixelCoord from, PixelCoord to) {
  std::vector<PixelCoord> out;
  const long long dx = to.x - from.x, dy = to.y - from.y;
  if (std::llabs(dx) >= std::llabs(dy)) {
    if (dx == 0) return {from};
    const int x0 = std::min(from.x, to.x), x1 = std::max(from.x, to.x);
    for (int x = x0; x <= x1; ++x) {
      const int base = from.y + static_cast<int>(floor_div((x - from.x) * dy, dx));
      for (int y = base - 1; y <= base + 2; ++y) {
        if (covers(from, to, {x, y})) out.push_back({x, y});
      }
    }
  } else {
    const int y0 = std::min(from.y, to.y), y1 = std::max(from.y, to.y);
    for (int y = y0; y <= y1; ++y) {
      const int base = from.x + static_cast<int>(floor_div((y - from.y) * dx, dy));
      for (int x = base - 1; x <= base + 2; ++x) {
        if (covers(from, to, {x, y})) out.push_back({x, y});
      }
    }
  }
  return out;
}

void rasterize_segment(Canvas& canvas, PixelCoord from, PixelCoord to, bool pen_down) {
  if (!canvas.contains(from) || !canvas.contains(to)) {
    throw std::out_of_range("segment " + describe(from) + " -> " + describe(to) +
                            " leaves the canvas");
  }
  if (!pen_down) return;
  for (auto p : segment_cover(from, to)) canvas.set(p);
}

Canvas rasterized(Canvas canvas, PixelCoord from, PixelCoord to, bool pen_down) {
  rasterize_segment(canvas, from, to, pen_down);
  return canvas;
}

Canvas make_position_channel(PixelCoord pos, int width, int height) {
  Canvas grid(width, height);
  if (!grid.contains(pos)) {
    throw std::out_of_range("pen position " + describe(pos) + " outside grid");
  }
  grid.set(pos);
  return grid;
}

}  // namespace sketchrl
