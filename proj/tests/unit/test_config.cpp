#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sketchrl/config.hpp"

using namespace sketchrl;
using nlohmann::json;

namespace {

std::string error_of(const json& j) {
  try {
    parse_run_config(j);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, DefaultsAreValidAndRoundTrip) {
  const RunConfig c = default_run_config();
  EXPECT_NO_THROW(c.validate());
  const json j = run_config_to_json(c);
  EXPECT_EQ(run_config_to_json(parse_run_config(j)), j);
  EXPECT_EQ(c.canvas.pixels_per_side, 42);
  EXPECT_EQ(c.canvas.centimeters_per_side, 21.0);
  EXPECT_LE(c.commander.sac.total_steps, 200000);
  EXPECT_LE(c.stroker.sac.total_steps, 300000);
  EXPECT_EQ(c.stroker.env.boundary_side, c.commander.episode.boundary_side);
}

TEST(Config, OverlayChangesOnlyNamedKeys) {
  const RunConfig c = parse_run_config(json::parse(R"({"commander":{"sac":{"seed":99}},"deployment":{"sync":false}})"));
  EXPECT_EQ(c.commander.sac.seed, 99u);
  EXPECT_FALSE(c.deployment.sync);
  RunConfig d = default_run_config();
  d.commander.sac.seed = 99;
  d.deployment.sync = false;
  EXPECT_EQ(run_config_to_json(c), run_config_to_json(d));
}

TEST(Config, UnknownKeysAndBadValuesNameTheirPath) {
  EXPECT_NE(error_of(json::parse(R"({"commander":{"sac":{"gama":0.9}}})")).find("commander.sac.gama"),
            std::string::npos);
  EXPECT_NE(error_of(json::parse(R"({"bogus":1})")).find("bogus"), std::string::npos);
  EXPECT_FALSE(error_of(json::parse(R"({"stroker":{"sac":{"gamma":2}}})")).empty());
  EXPECT_FALSE(error_of(json::parse(R"({"canvas":{"pixels_per_side":"42"}})")).empty());
  EXPECT_FALSE(error_of(json::parse(R"({"commander":{"episode":{"boundary_side":7}}})")).empty());
  EXPECT_FALSE(error_of(json::parse(R"({"deployment":{"noise":{"position_sigma_cm":-1}}})")).empty());
  EXPECT_FALSE(error_of(json::parse(R"({"commander":{"data":{"train_shapes":"blob"}}})")).empty());
  EXPECT_FALSE(error_of(json::parse(R"({"commander":{"similarity":"cosine"}})")).empty());
}

TEST(Config, MismatchedBoundaryIsRejected) {
  EXPECT_FALSE(error_of(json::parse(R"({"stroker":{"boundary_side":8}})")).empty());
  EXPECT_NO_THROW(parse_run_config(
      json::parse(R"({"stroker":{"boundary_side":8},"commander":{"episode":{"boundary_side":8}}})")));
}

TEST(Config, CommentsAndNullTargetEntropy) {
  const RunConfig c = parse_run_config_text(R"({
    // line comment
    "commander": {"sac": {"target_entropy": -1.5}, /* block */ "episode": {"start_pos": [3, 4]}}
  })");
  EXPECT_EQ(c.commander.sac.target_entropy, -1.5);
  ASSERT_TRUE(c.commander.episode.start_pos.has_value());
  EXPECT_EQ(c.commander.episode.start_pos->x, 3);
  const RunConfig d = parse_run_config(json::parse(R"({"commander":{"sac":{"target_entropy":null}}})"), c);
  EXPECT_FALSE(d.commander.sac.target_entropy.has_value());
}

TEST(Config, LoadFromFileAndChain) {
  const auto dir = std::filesystem::temp_directory_path() / "sketchrl_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "run.json") << R"({"stroker": {"sac": {"seed": 5}}})";
    std::ofstream(dir / "broken.json") << R"({"stroker": )";
  }
  EXPECT_EQ(load_run_config(dir / "run.json").stroker.sac.seed, 5u);
  try {
    load_run_config(dir / "broken.json");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("broken.json"), std::string::npos);
  }
  EXPECT_THROW(load_run_config(dir / "missing.json"), std::runtime_error);
  RunConfig c = default_run_config();
  EXPECT_EQ(chain_to_json(resolve_chain(c)), chain_to_json(default_chain()));
  c.stroker.chain_file = "nope.json";
  EXPECT_THROW(resolve_chain(c, dir), std::runtime_error);
  std::filesystem::remove_all(dir);
}

TEST(Config, SacJsonRoundTrip) {
  SacConfig s;
  s.hidden = {7, 9};
  s.target_entropy = -0.5;
  s.seed = 123;
  EXPECT_EQ(sac_config_to_json(parse_sac_config(sac_config_to_json(s))), sac_config_to_json(s));
}

TEST(Config, ShippedRunConfigMatchesBuiltIn) {
  const RunConfig c = load_run_config(SKETCHRL_SOURCE_DIR "/config/default_run.json");
  EXPECT_EQ(run_config_to_json(c), run_config_to_json(default_run_config()));
}
