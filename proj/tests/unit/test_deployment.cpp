#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sketchrl/dataset.hpp"
#include "sketchrl/deployment.hpp"
#include "sketchrl/evaluation.hpp"

using namespace sketchrl;

namespace {

FunctionCommander scripted() {
  return FunctionCommander([](const CommanderState& s, const Canvas&) {
    const double t = s.t;
    return StrokeCommand::clamped(s.t % 4 == 0 ? 0.2 : 0.9, 0.5 + 0.4 * std::sin(0.7 * t + s.pos.x),
                                  0.5 + 0.4 * std::cos(1.3 * t + s.pos.y));
  });
}

StrokerConfig stroker_config() {
  StrokerConfig c;
  c.mapping = CanvasMapping{};
  return c;
}

PerfectStroker stroker_at(PixelCoord px, const StrokerConfig& c) {
  PenPose p;
  p.position = pixel_to_physical(px, c.mapping);
  p.position.z = 0.0;
  p.roll = c.preferred_roll;
  p.pitch = c.preferred_pitch;
  return PerfectStroker(p, c);
}

Canvas some_target() { return generate_dataset("star", 1, 4, 42, 42).targets[0]; }

}  // namespace

TEST(Deployment, ContactBoundary) {
  PenPose p;
  EXPECT_TRUE(contact_test(p, 0.2));
  p.position.z = 1.0;
  EXPECT_FALSE(contact_test(p, 0.2));
  p.position.z = 0.2;
  EXPECT_TRUE(contact_test(p, 0.2));
  p.position.z = -0.2;
  EXPECT_TRUE(contact_test(p, 0.2));
  p.position.z = std::nextafter(0.2, 1.0);
  EXPECT_FALSE(contact_test(p, 0.2));
}

TEST(Deployment, NoiselessPerfectExecutionEqualsCommanderRollout) {
  const StrokerConfig sc = stroker_config();
  const CommanderEpisodeConfig ep;
  const Canvas target = some_target();
  for (bool sync : {true, false}) {
    auto cmd = scripted();
    auto exec = stroker_at(ep.start_for(42, 42), sc);
    DeploymentConfig cfg;
    cfg.sync = sync;
    const auto r = sketch(target, cmd, exec, sc.mapping, ep, sc, cfg);
    auto cmd2 = scripted();
    const Canvas rollout = commander_rollout(target, cmd2, ep);
    EXPECT_GT(rollout.ink_count(), 0u);
    EXPECT_EQ(r.real, rollout);
    EXPECT_EQ(r.imaginary, rollout);
    EXPECT_EQ(r.trace.records.size(), static_cast<std::size_t>(ep.episode_length));
  }
}

TEST(Deployment, SyncKeepsCanvasesEqualEveryStep) {
  const StrokerConfig sc = stroker_config();
  const CommanderEpisodeConfig ep;
  for (double sigma : {0.1, 0.5, 1.0, 3.0}) {
    auto cmd = scripted();
    auto exec = stroker_at(ep.start_for(42, 42), sc);
    DeploymentConfig cfg;
    cfg.noise = {sigma, 0.05, 0.01, 17};
    const auto r = sketch(some_target(), cmd, exec, sc.mapping, ep, sc, cfg);
    EXPECT_EQ(r.real, r.imaginary);
    for (const auto& rec : r.trace.records) EXPECT_EQ(rec.real_hash, rec.imaginary_hash);
  }
}

TEST(Deployment, TraceReplaysAndRoundTrips) {
  const StrokerConfig sc = stroker_config();
  const CommanderEpisodeConfig ep;
  for (bool sync : {true, false}) {
    auto cmd = scripted();
    auto exec = stroker_at({10, 30}, sc);
    DeploymentConfig cfg;
    cfg.sync = sync;
    cfg.noise = {0.7, 0.0, 0.0, 3};
    const auto r = sketch(some_target(), cmd, exec, sc.mapping, ep, sc, cfg);
    const auto [real, imag] = replay_trace(r.trace);
    EXPECT_EQ(real, r.real);
    EXPECT_EQ(imag, r.imaginary);
    std::stringstream io;
    write_sketch_trace(r.trace, io);
    const SketchTrace back = read_sketch_trace(io);
    EXPECT_EQ(back.records.size(), r.trace.records.size());
    EXPECT_EQ(back.sync, sync);
    const auto [real2, imag2] = replay_trace(back);
    EXPECT_EQ(real2, r.real);
    EXPECT_EQ(imag2, r.imaginary);
    SketchTrace tampered = back;
    tampered.records[5].real_to.x ^= 1;
    tampered.records[5].imaginary_to.x ^= 1;
    EXPECT_THROW(replay_trace(tampered), std::runtime_error);
    const std::string svg = sketch_to_svg(r.trace, sc.mapping);
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("polyline"), std::string::npos);
  }
  std::istringstream junk("{\"format\":\"other\"}\n");
  EXPECT_THROW(read_sketch_trace(junk), std::runtime_error);
}

TEST(Deployment, SyncReducesDisagreement) {
  const StrokerConfig sc = stroker_config();
  const CommanderEpisodeConfig ep;
  auto cmd = scripted();
  const KinematicChain chain = default_chain();
  DeploymentConfig cfg;
  cfg.noise = {1.0, 0.0, 0.0, 50};
  const auto targets = generate_dataset("all", 8, 9, 42, 42).targets;
  const auto ab = sync_ablation(targets, cmd, perfect_executor_factory(chain, sc), chain, sc.mapping, ep, sc, cfg, 20);
  EXPECT_EQ(ab.runs, 20);
  EXPECT_TRUE(ab.sync_identical_every_step);
  EXPECT_EQ(ab.disagreement_sync.mean, 0.0);
  EXPECT_GT(ab.disagreement_nosync.mean, ab.disagreement_sync.mean);
}

TEST(Deployment, RejectsMismatchedInputs) {
  const StrokerConfig sc = stroker_config();
  const CommanderEpisodeConfig ep;
  auto cmd = scripted();
  auto exec = stroker_at({21, 21}, sc);
  const DeploymentConfig cfg;
  EXPECT_THROW(sketch(Canvas(40, 42), cmd, exec, sc.mapping, ep, sc, cfg), std::invalid_argument);
  StrokerConfig other = sc;
  other.boundary_side = 8;
  EXPECT_THROW(sketch(some_target(), cmd, exec, sc.mapping, ep, other, cfg), std::invalid_argument);
  DeploymentConfig bad;
  bad.noise.position_sigma_cm = -1.0;
  EXPECT_THROW(sketch(some_target(), cmd, exec, sc.mapping, ep, sc, bad), std::invalid_argument);
  EXPECT_THROW(SacCommanderPolicy(DenseNetwork(), ep, {}), std::invalid_argument);
}
