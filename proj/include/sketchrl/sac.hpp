#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "sketchrl/network.hpp"

namespace sketchrl {

/// Goal-conditioned transition. Actions are in the squashed (-1, 1) box.
struct Transition {
  std::vector<double> state;
  std::vector<double> goal;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

/// Column-major batch: one transition per column.
struct Batch {
  Eigen::MatrixXd state, goal, action, next_state;
  Eigen::VectorXd reward, done;

  Eigen::Index size() const { return reward.size(); }
  Eigen::MatrixXd observation() const;       // [state; goal]
  Eigen::MatrixXd next_observation() const;  // [next_state; goal]
};

Batch make_batch(const std::vector<Transition>& transitions);

/// Fixed-capacity FIFO ring of transitions, sampled uniformly with replacement.
/// Features are stored in single precision.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int goal_dim, int action_dim);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  /// i-th oldest stored transition.
  Transition at(std::size_t i) const;

  /// Throws std::logic_error when fewer than batch_size transitions are stored.
  Batch sample(std::size_t batch_size, Rng& rng) const;

 private:
  void load(std::size_t slot, Batch& b, Eigen::Index col) const;

  std::size_t capacity_;
  int state_dim_, goal_dim_, action_dim_;
  std::vector<float> state_, goal_, action_, next_state_;
  std::vector<double> reward_;
  std::vector<std::uint8_t> done_;
  std::size_t head_ = 0, size_ = 0;
};

struct SacConfig {
  double gamma = 0.99;
  double tau = 0.005;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 3e-4;
  int batch_size = 256;
  std::size_t buffer_capacity = 100000;
  std::optional<double> target_entropy;  // -(action dimension) when unset
  double initial_alpha = 1.0;
  std::vector<int> hidden = {256, 256};
  long long total_steps = 0;
  long long start_steps = 1000;   // uniform random actions before this
  long long update_after = 1000;  // no updates before this many steps
  int update_every = 1;           // env steps between update rounds
  int updates_per_round = 1;
  double reward_scale = 1.0;      // applied to stored rewards
  long long eval_interval = 1000;
  long long checkpoint_interval = 0;  // 0: final checkpoint only
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kLogAlphaMin = -50.0;
inline constexpr double kLogAlphaMax = 10.0;

struct CriticTargets {
  Eigen::VectorXd target;         // y
  Eigen::VectorXd q1_next, q2_next, min_next, next_log_prob;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean log pi on the batch
};

/// Extra critic input: a bilinear read of a side x side grid stored in the
/// observation, at the point two action components select. Each component
/// maps (-1, 1) onto [0, side - 1]; the grid is row-major over (y, x).
struct ActionGridLookup {
  int grid_offset = 0;
  int side = 0;
  int action_x = 1;
  int action_y = 2;

  void validate(int observation_dim, int action_dim) const;
};

struct GridRead {
  double value = 0.0;
  double d_ax = 0.0;  // derivative w.r.t. the action components
  double d_ay = 0.0;
};

GridRead read_grid(const ActionGridLookup& lookup, const double* observation, const double* action);

/// Twin-critic soft actor-critic with learned temperature.
class SacAgent {
 public:
  SacAgent(int observation_dim, int action_dim, const SacConfig& cfg, Rng& rng,
           std::optional<ActionGridLookup> lookup = std::nullopt);

  int observation_dim() const { return observation_dim_; }
  int action_dim() const { return action_dim_; }
  const SacConfig& config() const { return cfg_; }
  const std::optional<ActionGridLookup>& lookup() const { return lookup_; }
  double target_entropy() const;

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v);

  DenseNetwork actor, q1, q2, q1_target, q2_target;

  /// Actions in (-1, 1), one column per observation column.
  Eigen::MatrixXd act(const Eigen::MatrixXd& observation, Rng& rng) const;
  Eigen::MatrixXd act_deterministic(const Eigen::MatrixXd& observation) const;

  CriticTargets critic_targets(const Batch& batch, const Eigen::MatrixXd& next_noise) const;

  /// Sum of both critics' MSE against fixed targets.
  double critic_loss(const Batch& batch, const Eigen::VectorXd& target, NetworkGradient* g1,
                     NetworkGradient* g2) const;

  /// mean(alpha log pi(a|s) - min(Q1, Q2)(s, a)) with a reparameterized by `noise`.
  double actor_loss(const Batch& batch, const Eigen::MatrixXd& noise, NetworkGradient* grad,
                    Eigen::VectorXd* log_probs = nullptr) const;

  /// -mean(log_alpha * (log pi + target entropy)); gradient w.r.t. log_alpha.
  double temperature_loss(const Eigen::VectorXd& log_probs, double* grad) const;

  double critic_update(const Batch& batch, Rng& rng);
  double actor_update(const Batch& batch, Rng& rng, Eigen::VectorXd* log_probs = nullptr);
  /// Returns the new alpha.
  double temperature_update(const Eigen::VectorXd& log_probs);
  void update_targets();

  UpdateStats update(const Batch& batch, Rng& rng);

 private:
  Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action) const;

  int observation_dim_, action_dim_;
  SacConfig cfg_;
  std::optional<ActionGridLookup> lookup_;
  double log_alpha_;
  Adam actor_opt_, q1_opt_, q2_opt_;
  ScalarAdam alpha_opt_;
};

/// target <- (1 - tau) target + tau online.
void polyak(DenseNetwork& target, const DenseNetwork& online, double tau);

}  // namespace sketchrl
