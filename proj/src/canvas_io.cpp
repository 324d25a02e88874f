#include "sketchrl/canvas_io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sketchrl {

namespace {

using json = nlohmann::json;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

}  // namespace

void write_png(const Canvas& canvas, const std::filesystem::path& path) {
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  const int w = canvas.width(), h = canvas.height();
  std::vector<png_byte> rows(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      rows[static_cast<std::size_t>(h - 1 - y) * w + x] = canvas.at({x, y}) ? 0 : 255;
    }
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng error writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < h; ++r) png_write_row(png, rows.data() + static_cast<std::size_t>(r) * w);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Canvas read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const int w = static_cast<int>(image.width), h = static_cast<int>(image.height);
  Canvas canvas(w, h);
  for (int r = 0; r < h; ++r) {
    for (int x = 0; x < w; ++x) {
      // Anything darker than mid-gray counts as ink.
      if (buffer[static_cast<std::size_t>(r) * w + x] < 128) canvas.set({x, h - 1 - r});
    }
  }
  return canvas;
}

void write_pbm(const Canvas& canvas, std::ostream& out) {
  out << "P1\n" << canvas.width() << ' ' << canvas.height() << '\n';
  for (int y = canvas.height() - 1; y >= 0; --y) {
    for (int x = 0; x < canvas.width(); ++x) {
      if (x) out << ' ';
      out << static_cast<int>(canvas.at({x, y}));
    }
    out << '\n';
  }
}

void write_pbm(const Canvas& canvas, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  write_pbm(canvas, out);
}

Canvas read_pbm(std::istream& in) {
  // Tokenizer that skips '#' comments, as the format allows.
  auto next_token = [&in]() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(c);
      // P1 allows packed digits with no separators.
      if (tok.size() == 1 && (c == '0' || c == '1') && in.peek() != EOF &&
          (in.peek() == '0' || in.peek() == '1')) {
        break;
      }
    }
    return tok;
  };
  if (next_token() != "P1") throw std::runtime_error("not a plain PBM (P1) file");
  int w = 0, h = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PBM header");
  }
  Canvas canvas(w, h);
  for (int y = h - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      const auto tok = next_token();
      if (tok == "1") {
        canvas.set({x, y});
      } else if (tok != "0") {
        throw std::runtime_error("malformed PBM pixel data");
      }
    }
  }
  return canvas;
}

Canvas read_pbm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_pbm(in);
}

std::string to_json_line(const StrokeRecord& r) {
  json j;
  j["down"] = r.down;
  j["from"] = {r.from.x, r.from.y};
  j["to"] = {r.to.x, r.to.y};
  if (r.reward) j["reward"] = *r.reward;
  return j.dump();
}

StrokeRecord stroke_from_json_line(const std::string& line) {
  const auto j = json::parse(line);
  StrokeRecord r;
  r.down = j.at("down").get<bool>();
  r.from = {j.at("from").at(0).get<int>(), j.at("from").at(1).get<int>()};
  r.to = {j.at("to").at(0).get<int>(), j.at("to").at(1).get<int>()};
  if (j.contains("reward")) r.reward = j.at("reward").get<double>();
  return r;
}

void write_stroke_trace(const std::vector<StrokeRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<StrokeRecord> read_stroke_trace(std::istream& in) {
  std::vector<StrokeRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(stroke_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("stroke trace line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

Canvas render_strokes(const std::vector<StrokeRecord>& records, int width, int height) {
  Canvas canvas(width, height);
  for (const auto& r : records) rasterize_segment(canvas, r.from, r.to, r.down);
  return canvas;
}

}  // namespace sketchrl
