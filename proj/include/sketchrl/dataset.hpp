#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sketchrl/geometry.hpp"
#include "sketchrl/network.hpp"

namespace sketchrl {

enum class ShapeClass { Circle, Triangle, Square, Hexagon, Star, Zigzag, LetterZ, LetterM };

std::string shape_name(ShapeClass c);
ShapeClass shape_from_name(const std::string& name);
const std::vector<ShapeClass>& all_shapes();

/// Comma-separated class names, or "all". Throws on unknown or empty names.
std::vector<ShapeClass> parse_shape_spec(const std::string& spec);

/// Closed or open polyline in pixel coordinates.
using Polyline = std::vector<PixelCoord>;

struct ShapeSample {
  ShapeClass shape;
  std::vector<Polyline> polylines;
};

/// Random placement, size and rotation of one shape inside a width x height
/// canvas. Every vertex lies inside the canvas.
ShapeSample sample_shape(ShapeClass shape, int width, int height, Rng& rng);

/// Pen-down rasterization of consecutive vertices of every polyline.
Canvas render_polylines(const std::vector<Polyline>& polylines, int width, int height);

struct TargetDataset {
  int width = 0, height = 0;
  std::string source;  // "synthetic" or "strokes"
  std::vector<std::string> labels;
  std::vector<Canvas> targets;

  std::size_t size() const { return targets.size(); }
  void add(std::string label, Canvas target);
};

/// `count` targets cycling through the requested classes in order.
TargetDataset generate_dataset(const std::string& shape_spec, int count, std::uint64_t seed, int width,
                               int height);

/// Quick, Draw! simplified drawings: one JSON record per line, either an
/// object with a "drawing" member or the bare drawing. A drawing is a list of
/// strokes [[x0, x1, ...], [y0, y1, ...]] with integers in [0, source_box)
/// and y pointing down.
TargetDataset import_strokes(std::istream& in, int width, int height, int source_box = 256);
TargetDataset import_strokes(const std::filesystem::path& path, int width, int height, int source_box = 256);

/// Header line followed by one record per target (rows top first, '1' = ink).
void save_dataset(const TargetDataset& data, std::ostream& out);
void save_dataset(const TargetDataset& data, const std::filesystem::path& path);
TargetDataset load_dataset(std::istream& in);
TargetDataset load_dataset(const std::filesystem::path& path);

}  // namespace sketchrl
