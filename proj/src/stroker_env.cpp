#include "sketchrl/stroker_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sketchrl {

void PoseSchedule::validate(const KinematicChain& chain) const {
  if (initial_poses.size() != 9) {
    throw std::invalid_argument("pose schedule needs exactly 9 initial poses, got " +
                                std::to_string(initial_poses.size()));
  }
  if (goals_per_reinit < 1) throw std::invalid_argument("goals_per_reinit must be >= 1");
  for (std::size_t i = 0; i < initial_poses.size(); ++i) {
    if (!chain.within_limits(initial_poses[i])) {
      throw std::invalid_argument("initial pose " + std::to_string(i) + " violates joint limits");
    }
  }
}

PoseSchedule default_pose_schedule() {
  PoseSchedule s;
  // Row-major over canvas y = 5.25, 10.5, 15.75 cm and x = 5.25, 10.5, 15.75 cm.
  s.initial_poses = {
      {-3.784023, 0.528254, -2.492515, 0.533394, -1.551078, 0.0},
      {-3.697639, 0.587920, -2.369488, 0.348501, -1.539117, 0.0},
      {-3.631651, 0.611548, -2.238758, 0.191776, -1.530131, 0.0},
      {-3.641761, 0.514738, -2.513438, 0.563667, -1.531497, 0.0},
      {-3.571299, 0.583484, -2.388939, 0.367346, -1.522064, 0.0},
      {-3.518463, 0.611769, -2.256864, 0.204248, -1.515144, 0.0},
      {-3.484891, 0.516355, -2.516080, 0.556951, -1.510825, 0.0},
      {-3.435582, 0.585566, -2.391336, 0.359907, -1.504604, 0.0},
      {-3.398896, 0.613903, -2.259034, 0.196770, -1.500078, 0.0},
  };
  return s;
}

void StrokerConfig::validate(const KinematicChain& chain) const {
  mapping.validate();
  if (boundary_side < 2 || boundary_side % 2 != 0) throw std::invalid_argument("boundary_side must be even and >= 2");
  if (!(hover_height_cm >= 0.0)) throw std::invalid_argument("hover_height_cm must be >= 0");
  if (!(max_joint_delta > 0.0)) throw std::invalid_argument("max_joint_delta must be positive");
  schedule.validate(chain);
}

StrokerGoal make_stroker_goal(const StrokeCommand& cmd, const StrokerConfig& cfg) {
  const double scale = cfg.mapping.cm_per_pixel();
  StrokerGoal g;
  g.command = cmd;
  g.displacement = {command_offset(cmd.dx, cfg.boundary_side) * scale,
                    command_offset(cmd.dy, cfg.boundary_side) * scale,
                    cmd.pen_down() ? 0.0 : cfg.hover_height_cm};
  return g;
}

StrokerGoal sample_goal(Rng& rng, const StrokerConfig& cfg) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double down = u(rng);
  const double dx = u(rng);
  const double dy = u(rng);
  return make_stroker_goal({down, dx, dy}, cfg);
}

double cosine_similarity_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-9 || nb < 1e-9) return 0.0;
  return a.dot(b) / (na * nb);
}

double stroker_reward(const Eigen::Vector3d& goal, const Eigen::Vector3d& reached, double roll,
                      double pitch, double preferred_roll, double preferred_pitch,
                      const StrokerRewardWeights& w) {
  const Eigen::Vector3d e = goal - reached;
  const double dist = std::sqrt(e.x() * e.x() + e.y() * e.y() + w.z * e.z() * e.z());
  const double cosine = cosine_similarity_2d(goal.head<2>(), reached.head<2>());
  const double tilt = std::hypot(preferred_roll - roll, preferred_pitch - pitch);
  return -w.position * dist + w.cosine * cosine - w.rotation * tilt;
}

StrokerEnv::StrokerEnv(KinematicChain chain, StrokerConfig cfg)
    : chain_(std::move(chain)), cfg_(std::move(cfg)) {
  chain_.validate();
  cfg_.validate(chain_);
}

StrokerState StrokerEnv::state_at(const JointVector& joints) const {
  return {joints, forward_kinematics(chain_, joints)};
}

StrokerAction StrokerEnv::clamp_action(const StrokerAction& action) const {
  StrokerAction out;
  for (int i = 0; i < kJointCount; ++i) {
    out[i] = std::clamp(action[i], -cfg_.max_joint_delta, cfg_.max_joint_delta);
  }
  return out;
}

Eigen::Vector3d StrokerEnv::displacement(const PenPose& start, const PenPose& pose) const {
  return {pose.position.x - start.position.x, pose.position.y - start.position.y, pose.position.z};
}

double StrokerEnv::score(const PenPose& start, const PenPose& reached, const StrokerGoal& goal) const {
  Eigen::Vector3d g = goal.displacement, p = displacement(start, reached);
  if (!cfg_.displacement_goals) {
    const Eigen::Vector3d origin(start.position.x, start.position.y, 0.0);
    g += origin;
    p += origin;
  }
  return stroker_reward(g, p, reached.roll, reached.pitch, cfg_.preferred_roll, cfg_.preferred_pitch,
                        cfg_.weights);
}

StrokerStep StrokerEnv::step(const StrokerState& state, const StrokerAction& action,
                             const StrokerGoal& goal) const {
  const auto delta = clamp_action(action);
  StrokerStep out;
  for (int i = 0; i < kJointCount; ++i) out.joints[i] = state.joints[i] + delta[i];
  out.joints = chain_.clamp(out.joints);
  out.reached = forward_kinematics(chain_, out.joints);
  out.reached_displacement = displacement(state.episode_start_pen, out.reached);
  out.reward = score(state.episode_start_pen, out.reached, goal);
  out.done = true;
  return out;
}

JointVector schedule_reset(const PoseSchedule& schedule, long long goal_counter,
                           const JointVector& current, Rng& rng) {
  if (schedule.initial_poses.empty()) throw std::invalid_argument("empty pose schedule");
  if (goal_counter % schedule.goals_per_reinit != 0) return current;
  std::uniform_int_distribution<std::size_t> pick(0, schedule.initial_poses.size() - 1);
  return schedule.initial_poses[pick(rng)];
}

std::vector<double> stroker_state_features(const KinematicChain& chain, const JointVector& q) {
  std::vector<double> f(kJointCount);
  for (int i = 0; i < kJointCount; ++i) {
    const double mid = 0.5 * (chain.limits[i].lower + chain.limits[i].upper);
    const double half = 0.5 * (chain.limits[i].upper - chain.limits[i].lower);
    f[i] = (q[i] - mid) / half;
  }
  return f;
}

std::vector<double> stroker_goal_features(const StrokeCommand& cmd) {
  const auto a = action_from_command(cmd);
  return {a[0], a[1], a[2]};
}

}  // namespace sketchrl
