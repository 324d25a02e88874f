#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "sketchrl/canvas_io.hpp"
#include "sketchrl/geometry.hpp"
#include "sketchrl/similarity.hpp"

namespace sketchrl {

/// Commander action and Stroker goal: pen-down indicator plus the stroke end
/// point inside the square reach boundary, each in [0, 1].
struct StrokeCommand {
  double down = 0.0;
  double dx = 0.5;
  double dy = 0.5;

  /// Clamps every component into [0, 1]. NaN is rejected.
  static StrokeCommand clamped(double down, double dx, double dy);
  bool pen_down() const { return down > 0.5; }
};

struct CommanderEpisodeConfig {
  int episode_length = 50;
  int boundary_side = 10;                // L, pixels; even
  std::optional<PixelCoord> start_pos;   // canvas center when unset

  void validate() const;
  PixelCoord start_for(int width, int height) const;
};

struct CommanderState {
  Canvas canvas;
  PixelCoord pos;
  int t = 0;
};

struct DecodedStroke {
  bool pen_down = false;
  PixelCoord offset;  // rounded, before clamping
  PixelCoord target;  // clamped into the canvas
};

/// pen_down = down > 0.5; offset = round_half_up((d - 0.5) * L) per axis;
/// target = clamp(pos + offset).
DecodedStroke decode_offset(const StrokeCommand& cmd, PixelCoord pos,
                            const CommanderEpisodeConfig& cfg, int width, int height);

/// Continuous offset in pixels, before rounding.
inline double command_offset(double component, int boundary_side) {
  return (component - 0.5) * boundary_side;
}

struct CommanderStep {
  CommanderState next;
  double reward = 0.0;
  bool done = false;
  DecodedStroke stroke;
};

/// Imaginary-canvas drawing environment. Reward is the similarity gain
/// d(V_t, I) - d(V_{t-1}, I).
class CommanderEnv {
 public:
  CommanderEnv(int width, int height, CommanderEpisodeConfig cfg = {});

  int width() const { return width_; }
  int height() const { return height_; }
  const CommanderEpisodeConfig& config() const { return cfg_; }

  CommanderState reset(const Canvas& goal) const;

  CommanderStep step(const CommanderState& state, const StrokeCommand& cmd, const Canvas& goal,
                     const SimilarityProvider& similarity) const;

  /// Same transition with a precomputed score of the current canvas.
  CommanderStep step(const CommanderState& state, const StrokeCommand& cmd, const Canvas& goal,
                     const SimilarityProvider& similarity, double current_score,
                     double* next_score) const;

 private:
  void check_goal(const Canvas& goal) const;

  int width_, height_;
  CommanderEpisodeConfig cfg_;
};

/// Observation layout fed to the Commander networks.
struct CommanderObservationConfig {
  enum class Kind { Egocentric, Full };
  Kind kind = Kind::Egocentric;
  int crop = 11;  // egocentric window side, odd
  int pool = 6;   // egocentric coarse-grid block size
  bool gain_map = true;  // append the stroke gain map to the state

  void validate() const;
};

struct CommanderFeatures {
  std::vector<double> state;
  std::vector<double> goal;
};

/// Egocentric: windows of the canvas and of the undrawn target around the
/// pen, block-averaged undrawn target, pen position and time (state);
/// block-averaged target (goal).
/// Full: flattened canvas and one-hot position channel (state) and the
/// flattened target (goal).
/// With gain_map, the state ends with the stroke gain map.
CommanderFeatures commander_features(const CommanderState& state, const Canvas& goal,
                                     const CommanderEpisodeConfig& episode,
                                     const CommanderObservationConfig& obs);

std::pair<int, int> commander_feature_dims(int width, int height, const CommanderEpisodeConfig& episode,
                                           const CommanderObservationConfig& obs);

/// Pixel-count L2 gain of a pen-down stroke from the pen to every offset in
/// [-L/2, L/2]^2, divided by L. Row-major over (dy, dx), side L + 1.
std::vector<double> stroke_gain_map(const CommanderState& state, const Canvas& goal,
                                    const CommanderEpisodeConfig& episode);

/// Maps a squashed policy action in (-1, 1)^3 onto the command box.
StrokeCommand command_from_action(const double* action);

/// Inverse of command_from_action.
std::array<double, 3> action_from_command(const StrokeCommand& cmd);

}  // namespace sketchrl
