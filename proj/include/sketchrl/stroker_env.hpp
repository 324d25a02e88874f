#pragma once

#include <Eigen/Core>
#include <vector>

#include "sketchrl/commander_env.hpp"
#include "sketchrl/kinematics.hpp"
#include "sketchrl/network.hpp"

namespace sketchrl {

/// Scale factors of the stroke-execution reward.
struct StrokerRewardWeights {
  double position = 10.0;  // whole distance term
  double z = 5.0;          // inner weight on the squared z error (pen lifting)
  double cosine = 5.0;     // planar direction agreement
  double rotation = 1.0;   // pen tilt error
};

struct PoseSchedule {
  std::vector<JointVector> initial_poses;
  int goals_per_reinit = 100;

  void validate(const KinematicChain& chain) const;
};

/// Nine pen-on-surface poses of the default chain over a 3x3 grid of canvas
/// points (5.25, 10.5, 15.75 cm), tilted by the default preferred rotation.
PoseSchedule default_pose_schedule();

struct StrokerConfig {
  CanvasMapping mapping;
  int boundary_side = 10;         // must match the Commander's reach boundary
  double hover_height_cm = 1.0;   // pen-up goal height
  double max_joint_delta = 0.15;  // rad per joint per step
  double preferred_roll = 0.1;
  double preferred_pitch = 0.1;
  StrokerRewardWeights weights;
  bool displacement_goals = true;  // false: absolute positions in the reward
  PoseSchedule schedule = default_pose_schedule();

  void validate(const KinematicChain& chain) const;
};

/// Target displacement in cm. The planar part is relative to the episode
/// start pentip; z is the height above the surface.
struct StrokerGoal {
  StrokeCommand command;
  Eigen::Vector3d displacement = Eigen::Vector3d::Zero();
};

StrokerGoal make_stroker_goal(const StrokeCommand& cmd, const StrokerConfig& cfg);

/// down, dx, dy ~ U[0, 1].
StrokerGoal sample_goal(Rng& rng, const StrokerConfig& cfg);

/// Cosine of the angle between planar vectors; 0 when either norm < 1e-9.
double cosine_similarity_2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b);

/// -w_p sqrt(dx^2 + dy^2 + w_z dz^2) + w_c cos(g_xy, p_xy)
///   - w_r sqrt((roll_g - roll)^2 + (pitch_g - pitch)^2)
double stroker_reward(const Eigen::Vector3d& goal, const Eigen::Vector3d& reached, double roll,
                      double pitch, double preferred_roll, double preferred_pitch,
                      const StrokerRewardWeights& w = {});

struct StrokerState {
  JointVector joints{};
  PenPose episode_start_pen;
};

using StrokerAction = std::array<double, kJointCount>;

struct StrokerStep {
  double reward = 0.0;
  bool done = true;
  PenPose reached;
  JointVector joints{};
  Eigen::Vector3d reached_displacement = Eigen::Vector3d::Zero();
};

/// Single-step episodes: the joints move by the clamped action, FK gives the
/// reached pose and the reward scores it against the goal.
class StrokerEnv {
 public:
  StrokerEnv(KinematicChain chain, StrokerConfig cfg);

  const KinematicChain& chain() const { return chain_; }
  const StrokerConfig& config() const { return cfg_; }

  StrokerState state_at(const JointVector& joints) const;

  StrokerStep step(const StrokerState& state, const StrokerAction& action, const StrokerGoal& goal) const;

  /// Clamps each component to [-max_joint_delta, max_joint_delta].
  StrokerAction clamp_action(const StrokerAction& action) const;

  /// Displacement of `pose` in the reward's frame relative to `start`.
  Eigen::Vector3d displacement(const PenPose& start, const PenPose& pose) const;

  /// Reward for a reached pose given the episode start and goal.
  double score(const PenPose& start, const PenPose& reached, const StrokerGoal& goal) const;

 private:
  KinematicChain chain_;
  StrokerConfig cfg_;
};

/// Every goals_per_reinit goals (counter divisible by it, including 0) a
/// uniformly chosen predefined pose; otherwise `current`.
JointVector schedule_reset(const PoseSchedule& schedule, long long goal_counter,
                           const JointVector& current, Rng& rng);

/// Policy inputs: joints scaled into [-1, 1] by their limits, then the goal
/// command scaled into [-1, 1].
std::vector<double> stroker_state_features(const KinematicChain& chain, const JointVector& q);
std::vector<double> stroker_goal_features(const StrokeCommand& cmd);

}  // namespace sketchrl
