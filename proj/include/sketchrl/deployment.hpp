#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sketchrl/commander_env.hpp"
#include "sketchrl/kinematics.hpp"
#include "sketchrl/network.hpp"
#include "sketchrl/stroker_env.hpp"

namespace sketchrl {

/// Simulated execution error. Planar error accumulates as a random walk of
/// per-stroke Gaussian steps (the pen really ends up elsewhere); z and
/// rotation errors are drawn independently per stroke.
struct NoiseModel {
  double position_sigma_cm = 0.0;
  double z_sigma_cm = 0.0;
  double rotation_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DeploymentConfig {
  bool sync = true;
  double contact_threshold_cm = 0.2;
  NoiseModel noise;
};

/// True iff |z| <= threshold.
bool contact_test(const PenPose& pose, double threshold_cm);

class CommanderPolicy {
 public:
  virtual ~CommanderPolicy() = default;
  virtual StrokeCommand act(const CommanderState& state, const Canvas& target) = 0;
};

/// Deterministic SAC actor over commander_features.
class SacCommanderPolicy final : public CommanderPolicy {
 public:
  SacCommanderPolicy(DenseNetwork actor, CommanderEpisodeConfig episode, CommanderObservationConfig obs);
  StrokeCommand act(const CommanderState& state, const Canvas& target) override;

 private:
  DenseNetwork actor_;
  CommanderEpisodeConfig episode_;
  CommanderObservationConfig obs_;
};

class FunctionCommander final : public CommanderPolicy {
 public:
  using Fn = std::function<StrokeCommand(const CommanderState&, const Canvas&)>;
  explicit FunctionCommander(Fn fn) : fn_(std::move(fn)) {}
  StrokeCommand act(const CommanderState& state, const Canvas& target) override { return fn_(state, target); }

 private:
  Fn fn_;
};

struct ExecutedStroke {
  StrokerAction action{};  // joint deltas actually applied (zero for the oracle)
  PenPose reached;         // pose predicted by the executor's own model
};

/// Low-level executor driving the pen relative to its current pose.
class StrokeExecutor {
 public:
  virtual ~StrokeExecutor() = default;
  virtual PenPose current() const = 0;
  virtual ExecutedStroke execute(const StrokerGoal& goal) = 0;
};

/// Oracle that lands exactly on every goal with the preferred tilt.
class PerfectStroker final : public StrokeExecutor {
 public:
  PerfectStroker(PenPose start, StrokerConfig cfg);
  PenPose current() const override { return pose_; }
  ExecutedStroke execute(const StrokerGoal& goal) override;

 private:
  PenPose pose_;
  StrokerConfig cfg_;
};

/// Deterministic SAC actor moving the kinematic chain.
class PolicyStroker final : public StrokeExecutor {
 public:
  PolicyStroker(DenseNetwork actor, KinematicChain chain, StrokerConfig cfg, JointVector start);
  PenPose current() const override;
  ExecutedStroke execute(const StrokerGoal& goal) override;
  const JointVector& joints() const { return joints_; }

 private:
  DenseNetwork actor_;
  KinematicChain chain_;
  StrokerConfig cfg_;
  JointVector joints_;
};

struct SketchRecord {
  StrokeCommand command;       // as issued by the Commander
  StrokerGoal goal;            // as handed to the executor
  StrokerAction action{};
  PenPose reached;             // real pose, noise included
  bool contact = false;
  PixelCoord real_from, real_to;
  PixelCoord imaginary_from, imaginary_to;
  bool imaginary_down = false;
  std::uint64_t imaginary_hash = 0;
  std::uint64_t real_hash = 0;
};

struct SketchTrace {
  int width = 0, height = 0;
  bool sync = true;
  PenPose start;               // real pose before the first stroke
  PixelCoord start_pixel;
  std::vector<SketchRecord> records;
};

struct SketchResult {
  Canvas real;
  Canvas imaginary;
  SketchTrace trace;
};

/// Runs the Commander -> Stroker loop for one episode. The Commander's
/// decoded pixel displacement becomes the executor's goal; the executed pose
/// plus noise is the real pentip. With sync the imaginary canvas and pen
/// position follow the real pixel; without it they follow the command.
SketchResult sketch(const Canvas& target, CommanderPolicy& commander, StrokeExecutor& executor,
                    const CanvasMapping& mapping, const CommanderEpisodeConfig& episode,
                    const StrokerConfig& stroker, const DeploymentConfig& cfg);

/// Noise-free imaginary rollout of the Commander alone.
Canvas commander_rollout(const Canvas& target, CommanderPolicy& commander,
                         const CommanderEpisodeConfig& episode, std::vector<StrokeRecord>* strokes = nullptr);

/// Rebuilds (real, imaginary) canvases from a trace.
std::pair<Canvas, Canvas> replay_trace(const SketchTrace& trace);

/// Line-delimited records; the first line is a header.
void write_sketch_trace(const SketchTrace& trace, std::ostream& out);
SketchTrace read_sketch_trace(std::istream& in);

/// Pen-down real strokes as SVG polylines in centimeters.
std::string sketch_to_svg(const SketchTrace& trace, const CanvasMapping& mapping);

}  // namespace sketchrl
