#include "sketchrl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sketchrl {

using nlohmann::json;

namespace {

struct ShapeInfo {
  ShapeClass shape;
  const char* name;
};

constexpr ShapeInfo kShapes[] = {
    {ShapeClass::Circle, "circle"},   {ShapeClass::Triangle, "triangle"}, {ShapeClass::Square, "square"},
    {ShapeClass::Hexagon, "hexagon"}, {ShapeClass::Star, "star"},         {ShapeClass::Zigzag, "zigzag"},
    {ShapeClass::LetterZ, "letter_z"}, {ShapeClass::LetterM, "letter_m"},
};

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * unit(rng); }

using Point = std::pair<double, double>;

std::vector<Point> regular(int n, double phase = 0.0) {
  std::vector<Point> p;
  for (int i = 0; i <= n; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * (i % n) / n;
    p.emplace_back(std::cos(a), std::sin(a));
  }
  return p;
}

std::vector<Point> template_points(ShapeClass shape) {
  switch (shape) {
    case ShapeClass::Circle: return regular(16);
    case ShapeClass::Triangle: return regular(3, std::numbers::pi / 2);
    case ShapeClass::Square: return regular(4, std::numbers::pi / 4);
    case ShapeClass::Hexagon: return regular(6);
    case ShapeClass::Star: {
      std::vector<Point> p;
      for (int i = 0; i <= 10; ++i) {
        const double a = std::numbers::pi / 2 + std::numbers::pi * (i % 10) / 5;
        const double r = i % 2 == 0 ? 1.0 : 0.45;
        p.emplace_back(r * std::cos(a), r * std::sin(a));
      }
      return p;
    }
    case ShapeClass::Zigzag:
      return {{-1.0, -0.4}, {-0.5, 0.4}, {0.0, -0.4}, {0.5, 0.4}, {1.0, -0.4}};
    case ShapeClass::LetterZ: return {{-0.7, 0.8}, {0.7, 0.8}, {-0.7, -0.8}, {0.7, -0.8}};
    case ShapeClass::LetterM: return {{-0.8, -0.8}, {-0.8, 0.8}, {0.0, 0.0}, {0.8, 0.8}, {0.8, -0.8}};
  }
  throw std::invalid_argument("unknown shape");
}

bool upright(ShapeClass s) {
  return s == ShapeClass::Zigzag || s == ShapeClass::LetterZ || s == ShapeClass::LetterM;
}

Canvas parse_rows(const json& rows, int width, int height) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != height) {
    throw std::runtime_error("expected " + std::to_string(height) + " rows");
  }
  Canvas c(width, height);
  for (int r = 0; r < height; ++r) {
    const auto s = rows[r].get<std::string>();
    if (static_cast<int>(s.size()) != width) throw std::runtime_error("row " + std::to_string(r) + " has wrong width");
    for (int x = 0; x < width; ++x) {
      if (s[x] != '0' && s[x] != '1') throw std::runtime_error("rows may only contain '0' and '1'");
      c.set({x, height - 1 - r}, s[x] == '1');
    }
  }
  return c;
}

}  // namespace

std::string shape_name(ShapeClass c) {
  for (const auto& s : kShapes) {
    if (s.shape == c) return s.name;
  }
  throw std::invalid_argument("unknown shape");
}

ShapeClass shape_from_name(const std::string& name) {
  for (const auto& s : kShapes) {
    if (name == s.name) return s.shape;
  }
  throw std::invalid_argument("unknown shape class '" + name + "'");
}

const std::vector<ShapeClass>& all_shapes() {
  static const std::vector<ShapeClass> v = [] {
    std::vector<ShapeClass> out;
    for (const auto& s : kShapes) out.push_back(s.shape);
    return out;
  }();
  return v;
}

std::vector<ShapeClass> parse_shape_spec(const std::string& spec) {
  if (spec == "all") return all_shapes();
  std::vector<ShapeClass> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty entry in shape spec '" + spec + "'");
    out.push_back(shape_from_name(item.substr(b, e - b + 1)));
  }
  if (out.empty()) throw std::invalid_argument("empty shape spec");
  return out;
}

ShapeSample sample_shape(ShapeClass shape, int width, int height, Rng& rng) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("canvas dimensions must be positive");
  const auto pts = template_points(shape);
  const double side = std::min(width, height) - 1;
  const double radius = uniform(rng, 0.22, 0.42) * side;
  const double angle = upright(shape) ? uniform(rng, -0.35, 0.35) : uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double ca = std::cos(angle), sa = std::sin(angle);
  std::vector<Point> local;
  double ext_x = 0.0, ext_y = 0.0;
  for (auto [x, y] : pts) {
    const double rx = radius * (ca * x - sa * y), ry = radius * (sa * x + ca * y);
    local.emplace_back(rx, ry);
    ext_x = std::max(ext_x, std::abs(rx));
    ext_y = std::max(ext_y, std::abs(ry));
  }
  auto center = [&](double ext, int n) {
    const double lo = ext, hi = n - 1 - ext;
    return lo <= hi ? uniform(rng, lo, hi) : 0.5 * (n - 1);
  };
  const double cx = center(ext_x, width);
  const double cy = center(ext_y, height);
  Polyline line;
  for (auto [x, y] : local) {
    line.push_back({std::clamp(round_half_up(cx + x), 0, width - 1), std::clamp(round_half_up(cy + y), 0, height - 1)});
  }
  return {shape, {line}};
}

Canvas render_polylines(const std::vector<Polyline>& polylines, int width, int height) {
  Canvas c(width, height);
  for (const auto& line : polylines) {
    if (line.size() == 1) rasterize_segment(c, line[0], line[0], true);
    for (std::size_t i = 1; i < line.size(); ++i) rasterize_segment(c, line[i - 1], line[i], true);
  }
  return c;
}

void TargetDataset::add(std::string label, Canvas target) {
  if (target.width() != width || target.height() != height) {
    throw std::invalid_argument("target dimensions differ from the dataset's");
  }
  labels.push_back(std::move(label));
  targets.push_back(std::move(target));
}

TargetDataset generate_dataset(const std::string& shape_spec, int count, std::uint64_t seed, int width, int height) {
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  const auto shapes = parse_shape_spec(shape_spec);
  TargetDataset data{width, height, "synthetic", {}, {}};
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const auto s = sample_shape(shapes[i % shapes.size()], width, height, rng);
    data.add(shape_name(s.shape), render_polylines(s.polylines, width, height));
  }
  return data;
}

TargetDataset import_strokes(std::istream& in, int width, int height, int source_box) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("canvas dimensions must be positive");
  if (source_box < 2) throw std::invalid_argument("source box must be at least 2");
  TargetDataset data{width, height, "strokes", {}, {}};
  std::string line;
  int n = 0;
  const double sx = static_cast<double>(width - 1) / (source_box - 1);
  const double sy = static_cast<double>(height - 1) / (source_box - 1);
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      const json& drawing = rec.is_object() ? rec.at("drawing") : rec;
      if (!drawing.is_array()) throw std::runtime_error("drawing must be a list of strokes");
      std::vector<Polyline> lines;
      for (const auto& stroke : drawing) {
        if (!stroke.is_array() || stroke.size() < 2) throw std::runtime_error("stroke must be [xs, ys]");
        const auto& xs = stroke.at(0);
        const auto& ys = stroke.at(1);
        if (!xs.is_array() || !ys.is_array() || xs.size() != ys.size()) {
          throw std::runtime_error("stroke coordinate lists differ in length");
        }
        Polyline pl;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          if (!xs[i].is_number_integer() || !ys[i].is_number_integer()) {
            throw std::runtime_error("coordinates must be integers");
          }
          const long long x = xs[i].get<long long>(), y = ys[i].get<long long>();
          if (x < 0 || y < 0 || x >= source_box || y >= source_box) {
            throw std::runtime_error("coordinate (" + std::to_string(x) + ", " + std::to_string(y) +
                                     ") outside the source box of " + std::to_string(source_box));
          }
          pl.push_back({round_half_up(x * sx), height - 1 - round_half_up(y * sy)});
        }
        lines.push_back(std::move(pl));
      }
      const std::string label = rec.is_object() && rec.contains("word") ? rec["word"].get<std::string>() : "";
      data.add(label, render_polylines(lines, width, height));
    } catch (const std::exception& e) {
      throw std::runtime_error("stroke file line " + std::to_string(n) + ": " + e.what());
    }
  }
  return data;
}

TargetDataset import_strokes(const std::filesystem::path& path, int width, int height, int source_box) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return import_strokes(in, width, height, source_box);
}

void save_dataset(const TargetDataset& data, std::ostream& out) {
  out << json{{"format", "sketchrl-dataset"}, {"version", 1},   {"width", data.width},
              {"height", data.height},        {"source", data.source}, {"count", data.size()}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& c = data.targets[i];
    json rows = json::array();
    for (int y = c.height() - 1; y >= 0; --y) {
      std::string r(c.width(), '0');
      for (int x = 0; x < c.width(); ++x) r[x] = c.at({x, y}) ? '1' : '0';
      rows.push_back(r);
    }
    out << json{{"label", data.labels[i]}, {"rows", rows}}.dump() << '\n';
  }
}

void save_dataset(const TargetDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_dataset(data, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

TargetDataset load_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
  TargetDataset data;
  std::size_t count = 0;
  try {
    const json h = json::parse(line);
    if (h.value("format", "") != "sketchrl-dataset") throw std::runtime_error("not a dataset file");
    if (h.at("version").get<int>() != 1) throw std::runtime_error("unsupported dataset version");
    data.width = h.at("width").get<int>();
    data.height = h.at("height").get<int>();
    data.source = h.at("source").get<std::string>();
    count = h.at("count").get<std::size_t>();
    if (data.width <= 0 || data.height <= 0) throw std::runtime_error("bad dimensions");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("dataset line 1: ") + e.what());
  }
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json r = json::parse(line);
      data.add(r.at("label").get<std::string>(), parse_rows(r.at("rows"), data.width, data.height));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (data.size() != count) throw std::runtime_error("dataset header announces " + std::to_string(count) + " targets, found " + std::to_string(data.size()));
  return data;
}

TargetDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_dataset(in);
}

}  // namespace sketchrl
