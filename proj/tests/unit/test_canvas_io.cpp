#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sketchrl/canvas_io.hpp"

using namespace sketchrl;
namespace fs = std::filesystem;

namespace {

Canvas sample_canvas() {
  Canvas c(7, 5);
  c.set({0, 0});
  c.set({6, 4});
  c.set({3, 1});
  return c;
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "sketchrl_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Png, RoundTrip) {
  const auto p = temp_file("rt.png");
  write_png(sample_canvas(), p);
  EXPECT_EQ(read_png(p), sample_canvas());
}

TEST(Png, MissingFileThrows) { EXPECT_THROW(read_png("/nonexistent/none.png"), std::runtime_error); }

TEST(Pbm, TopRowFirst) {
  Canvas c(3, 2);
  c.set({0, 1});  // top-left
  std::stringstream ss;
  write_pbm(c, ss);
  std::string magic, w, h, r0, r1;
  ss >> magic >> w >> h;
  EXPECT_EQ(magic, "P1");
  EXPECT_EQ(w, "3");
  EXPECT_EQ(h, "2");
  std::string rest((std::istreambuf_iterator<char>(ss)), {});
  EXPECT_NE(rest.find("1 0 0"), std::string::npos);
  std::stringstream in(rest.insert(0, "P1\n3 2\n"));
  EXPECT_EQ(read_pbm(in), c);
}

TEST(Pbm, CommentsAndPackedDigits) {
  std::stringstream in("P1\n# comment\n3 2\n100\n001\n");
  const Canvas c = read_pbm(in);
  EXPECT_EQ(c.at({0, 1}), 1);
  EXPECT_EQ(c.at({2, 0}), 1);
  EXPECT_EQ(c.ink_count(), 2u);
}

TEST(Pbm, Malformed) {
  std::stringstream a("P4\n1 1\n0");
  EXPECT_THROW(read_pbm(a), std::runtime_error);
  std::stringstream b("P1\n2 2\n0 1 2 0");
  EXPECT_THROW(read_pbm(b), std::runtime_error);
  std::stringstream c("P1\n2 2\n0 1");
  EXPECT_THROW(read_pbm(c), std::runtime_error);
}

TEST(StrokeTrace, RoundTripAndRender) {
  std::vector<StrokeRecord> recs = {{true, {0, 0}, {3, 3}, 0.25}, {false, {3, 3}, {5, 1}, std::nullopt},
                                    {true, {5, 1}, {5, 4}, -1.0}};
  std::stringstream ss;
  write_stroke_trace(recs, ss);
  const auto back = read_stroke_trace(ss);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(back[i].down, recs[i].down);
    EXPECT_EQ(back[i].from, recs[i].from);
    EXPECT_EQ(back[i].to, recs[i].to);
    EXPECT_EQ(back[i].reward, recs[i].reward);
  }
  Canvas expect(6, 6);
  rasterize_segment(expect, {0, 0}, {3, 3}, true);
  rasterize_segment(expect, {5, 1}, {5, 4}, true);
  EXPECT_EQ(render_strokes(recs, 6, 6), expect);
}

TEST(StrokeTrace, ErrorNamesLine) {
  std::stringstream ss("{\"down\":true,\"from\":[0,0],\"to\":[1,1]}\n{\"down\":1}\n");
  try {
    read_stroke_trace(ss);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}
