#include "sketchrl/commander_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sketchrl {

StrokeCommand StrokeCommand::clamped(double down, double dx, double dy) {
  if (std::isnan(down) || std::isnan(dx) || std::isnan(dy)) {
    throw std::invalid_argument("stroke command has NaN component");
  }
  return {std::clamp(down, 0.0, 1.0), std::clamp(dx, 0.0, 1.0), std::clamp(dy, 0.0, 1.0)};
}

void CommanderEpisodeConfig::validate() const {
  if (episode_length < 1) throw std::invalid_argument("episode_length must be >= 1");
  if (boundary_side < 2 || boundary_side % 2 != 0) {
    throw std::invalid_argument("boundary_side must be even and >= 2, got " +
                                std::to_string(boundary_side));
  }
}

PixelCoord CommanderEpisodeConfig::start_for(int width, int height) const {
  return start_pos.value_or(PixelCoord{width / 2, height / 2});
}

DecodedStroke decode_offset(const StrokeCommand& cmd, PixelCoord pos,
                            const CommanderEpisodeConfig& cfg, int width, int height) {
  DecodedStroke d;
  d.pen_down = cmd.pen_down();
  d.offset = {round_half_up(command_offset(cmd.dx, cfg.boundary_side)),
              round_half_up(command_offset(cmd.dy, cfg.boundary_side))};
  d.target = {std::clamp(pos.x + d.offset.x, 0, width - 1),
              std::clamp(pos.y + d.offset.y, 0, height - 1)};
  return d;
}

CommanderEnv::CommanderEnv(int width, int height, CommanderEpisodeConfig cfg)
    : width_(width), height_(height), cfg_(std::move(cfg)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("commander canvas must be non-empty");
  cfg_.validate();
  const auto start = cfg_.start_for(width, height);
  if (start.x < 0 || start.y < 0 || start.x >= width || start.y >= height) {
    throw std::invalid_argument("start position outside canvas");
  }
}

void CommanderEnv::check_goal(const Canvas& goal) const {
  if (goal.width() != width_ || goal.height() != height_) {
    throw std::invalid_argument("goal is " + std::to_string(goal.width()) + "x" +
                                std::to_string(goal.height()) + ", environment expects " +
                                std::to_string(width_) + "x" + std::to_string(height_));
  }
}

CommanderState CommanderEnv::reset(const Canvas& goal) const {
  check_goal(goal);
  return {Canvas(width_, height_), cfg_.start_for(width_, height_), 0};
}

CommanderStep CommanderEnv::step(const CommanderState& state, const StrokeCommand& cmd,
                                 const Canvas& goal, const SimilarityProvider& similarity) const {
  return step(state, cmd, goal, similarity, similarity.score(state.canvas, goal), nullptr);
}

CommanderStep CommanderEnv::step(const CommanderState& state, const StrokeCommand& cmd,
                                 const Canvas& goal, const SimilarityProvider& similarity,
                                 double current_score, double* next_score) const {
  check_goal(goal);
  if (state.t >= cfg_.episode_length) throw std::logic_error("step called on a finished episode");
  if (!state.canvas.same_shape(goal)) throw std::invalid_argument("state canvas does not match goal");
  CommanderStep out{state, 0.0, false, {}};
  out.stroke = decode_offset(cmd, state.pos, cfg_, width_, height_);
  rasterize_segment(out.next.canvas, state.pos, out.stroke.target, out.stroke.pen_down);
  out.next.pos = out.stroke.target;
  out.next.t = state.t + 1;
  const double after = similarity.score(out.next.canvas, goal);
  out.reward = after - current_score;
  out.done = out.next.t == cfg_.episode_length;
  if (next_score) *next_score = after;
  return out;
}

void CommanderObservationConfig::validate() const {
  if (kind == Kind::Egocentric) {
    if (crop < 1 || crop % 2 == 0) throw std::invalid_argument("observation crop must be odd and positive");
    if (pool < 1) throw std::invalid_argument("observation pool must be positive");
  }
}

std::pair<int, int> commander_feature_dims(int width, int height, const CommanderEpisodeConfig& episode,
                                           const CommanderObservationConfig& obs) {
  obs.validate();
  episode.validate();
  const int gain = obs.gain_map ? (episode.boundary_side + 1) * (episode.boundary_side + 1) : 0;
  if (obs.kind == CommanderObservationConfig::Kind::Full) {
    return {2 * width * height + gain, width * height};
  }
  const int gx = (width + obs.pool - 1) / obs.pool, gy = (height + obs.pool - 1) / obs.pool;
  return {2 * obs.crop * obs.crop + gx * gy + 3 + gain, gx * gy};
}

std::vector<double> stroke_gain_map(const CommanderState& state, const Canvas& goal,
                                    const CommanderEpisodeConfig& episode) {
  if (!state.canvas.same_shape(goal)) throw std::invalid_argument("gain map: canvas/goal mismatch");
  const int half = episode.boundary_side / 2;
  std::vector<double> out;
  out.reserve((2 * half + 1) * (2 * half + 1));
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const PixelCoord to{std::clamp(state.pos.x + dx, 0, goal.width() - 1),
                          std::clamp(state.pos.y + dy, 0, goal.height() - 1)};
      int gain = 0;
      for (const auto& p : segment_cover(state.pos, to)) {
        if (!state.canvas.at(p)) gain += goal.at(p) ? 1 : -1;
      }
      out.push_back(static_cast<double>(gain) / episode.boundary_side);
    }
  }
  return out;
}

namespace {

void append_pooled(const Canvas& c, int pool, std::vector<double>& out) {
  const int gx = (c.width() + pool - 1) / pool, gy = (c.height() + pool - 1) / pool;
  for (int by = 0; by < gy; ++by) {
    for (int bx = 0; bx < gx; ++bx) {
      int count = 0, ink = 0;
      for (int y = by * pool; y < std::min((by + 1) * pool, c.height()); ++y) {
        for (int x = bx * pool; x < std::min((bx + 1) * pool, c.width()); ++x) {
          ink += c.at({x, y});
          ++count;
        }
      }
      out.push_back(static_cast<double>(ink) / count);
    }
  }
}

void append_crop(const Canvas& c, PixelCoord center, int crop, std::vector<double>& out) {
  const int half = crop / 2;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const PixelCoord p{center.x + dx, center.y + dy};
      out.push_back(c.contains(p) ? c.at(p) : 0.0);
    }
  }
}

}  // namespace

CommanderFeatures commander_features(const CommanderState& state, const Canvas& goal,
                                     const CommanderEpisodeConfig& episode,
                                     const CommanderObservationConfig& obs) {
  if (!state.canvas.same_shape(goal)) throw std::invalid_argument("observation: canvas/goal mismatch");
  CommanderFeatures f;
  const auto [sd, gd] = commander_feature_dims(goal.width(), goal.height(), episode, obs);
  f.state.reserve(sd);
  f.goal.reserve(gd);
  if (obs.kind == CommanderObservationConfig::Kind::Full) {
    for (auto c : state.canvas.cells()) f.state.push_back(c);
    const auto pos = make_position_channel(state.pos, goal.width(), goal.height());
    for (auto c : pos.cells()) f.state.push_back(c);
    for (auto c : goal.cells()) f.goal.push_back(c);
  } else {
    Canvas remaining(goal.width(), goal.height());
    for (int y = 0; y < goal.height(); ++y) {
      for (int x = 0; x < goal.width(); ++x) {
        if (goal.at({x, y}) && !state.canvas.at({x, y})) remaining.set({x, y});
      }
    }
    append_crop(state.canvas, state.pos, obs.crop, f.state);
    append_crop(remaining, state.pos, obs.crop, f.state);
    append_pooled(remaining, obs.pool, f.state);
    f.state.push_back(2.0 * state.pos.x / std::max(goal.width() - 1, 1) - 1.0);
    f.state.push_back(2.0 * state.pos.y / std::max(goal.height() - 1, 1) - 1.0);
    f.state.push_back(static_cast<double>(state.t) / episode.episode_length);
    append_pooled(goal, obs.pool, f.goal);
  }
  if (obs.gain_map) {
    const auto gain = stroke_gain_map(state, goal, episode);
    f.state.insert(f.state.end(), gain.begin(), gain.end());
  }
  return f;
}

StrokeCommand command_from_action(const double* action) {
  return StrokeCommand::clamped(0.5 * (action[0] + 1.0), 0.5 * (action[1] + 1.0),
                                0.5 * (action[2] + 1.0));
}

std::array<double, 3> action_from_command(const StrokeCommand& cmd) {
  return {2.0 * cmd.down - 1.0, 2.0 * cmd.dx - 1.0, 2.0 * cmd.dy - 1.0};
}

}  // namespace sketchrl
