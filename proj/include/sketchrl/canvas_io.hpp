#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sketchrl/geometry.hpp"

namespace sketchrl {

// Image files store the top row first; canvas row height-1 is the top.

void write_png(const Canvas& canvas, const std::filesystem::path& path);
Canvas read_png(const std::filesystem::path& path);

/// Plain (P1) portable bitmap, 1 = ink.
void write_pbm(const Canvas& canvas, std::ostream& out);
void write_pbm(const Canvas& canvas, const std::filesystem::path& path);
Canvas read_pbm(std::istream& in);
Canvas read_pbm(const std::filesystem::path& path);

/// One straight stroke. `reward` is only written when present.
struct StrokeRecord {
  bool down = false;
  PixelCoord from;
  PixelCoord to;
  std::optional<double> reward;
};

std::string to_json_line(const StrokeRecord& r);
StrokeRecord stroke_from_json_line(const std::string& line);

void write_stroke_trace(const std::vector<StrokeRecord>& records, std::ostream& out);
std::vector<StrokeRecord> read_stroke_trace(std::istream& in);

/// Replays a stroke trace onto a blank canvas.
Canvas render_strokes(const std::vector<StrokeRecord>& records, int width, int height);

}  // namespace sketchrl
