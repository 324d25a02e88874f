#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace sketchrl {

/// Integer pixel index. y grows upward (row 0 is the bottom of the canvas).
struct PixelCoord {
  int x = 0;
  int y = 0;
  auto operator<=>(const PixelCoord&) const = default;
};

/// Point in the canvas frame, centimeters. z = 0 is the drawing surface.
struct PhysicalCoord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Binary ink raster. Cells are exactly 0 (blank) or 1 (ink).
class Canvas {
 public:
  Canvas(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return ink_.size(); }

  bool contains(PixelCoord p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  std::uint8_t at(PixelCoord p) const;
  void set(PixelCoord p, bool inked = true);

  /// Row-major cells, index = y * width + x.
  std::span<const std::uint8_t> cells() const { return ink_; }

  std::size_t ink_count() const;
  bool same_shape(const Canvas& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// FNV-1a over dimensions and cells.
  std::uint64_t hash() const;

  bool operator==(const Canvas&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> ink_;
};

/// Square physical canvas <-> square pixel grid.
struct CanvasMapping {
  int pixels_per_side = 42;
  double centimeters_per_side = 21.0;

  double cm_per_pixel() const { return centimeters_per_side / pixels_per_side; }
  void validate() const;
};

/// Scale, round half up, clamp into the grid. Throws on non-finite input.
PixelCoord physical_to_pixel(const PhysicalCoord& p, const CanvasMapping& m);

/// Pixel center in cm with z = 0. Throws std::out_of_range outside the grid.
PhysicalCoord pixel_to_physical(PixelCoord px, const CanvasMapping& m);

/// Rounds half up (toward +inf) to the nearest integer.
int round_half_up(double v);

/// Inks every pixel whose center lies within half a pixel of the segment
/// [from, to]. Pen-up segments leave the canvas untouched.
void rasterize_segment(Canvas& canvas, PixelCoord from, PixelCoord to, bool pen_down);

/// Value-returning form of rasterize_segment.
Canvas rasterized(Canvas canvas, PixelCoord from, PixelCoord to, bool pen_down);

/// Pixels covered by the segment, in no particular order.
std::vector<PixelCoord> segment_cover(PixelCoord from, PixelCoord to);

/// One-hot grid marking the pen position.
Canvas make_position_channel(PixelCoord pos, int width, int height);

}  // namespace sketchrl
