#include "sketchrl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sketchrl {

namespace {

Eigen::MatrixXd vstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string("transition ") + what + " is not finite");
  }
}

}  // namespace

Eigen::MatrixXd Batch::observation() const { return vstack(state, goal); }
Eigen::MatrixXd Batch::next_observation() const { return vstack(next_state, goal); }

Batch make_batch(const std::vector<Transition>& ts) {
  if (ts.empty()) throw std::invalid_argument("empty batch");
  const auto n = static_cast<Eigen::Index>(ts.size());
  const auto sd = static_cast<Eigen::Index>(ts[0].state.size());
  const auto gd = static_cast<Eigen::Index>(ts[0].goal.size());
  const auto ad = static_cast<Eigen::Index>(ts[0].action.size());
  Batch b;
  b.state.resize(sd, n);
  b.goal.resize(gd, n);
  b.action.resize(ad, n);
  b.next_state.resize(sd, n);
  b.reward.resize(n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = ts[j];
    if (static_cast<Eigen::Index>(t.state.size()) != sd || static_cast<Eigen::Index>(t.goal.size()) != gd ||
        static_cast<Eigen::Index>(t.action.size()) != ad ||
        static_cast<Eigen::Index>(t.next_state.size()) != sd) {
      throw std::invalid_argument("transitions in a batch must share dimensions");
    }
    b.state.col(j) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), sd);
    b.goal.col(j) = Eigen::Map<const Eigen::VectorXd>(t.goal.data(), gd);
    b.action.col(j) = Eigen::Map<const Eigen::VectorXd>(t.action.data(), ad);
    b.next_state.col(j) = Eigen::Map<const Eigen::VectorXd>(t.next_state.data(), sd);
    b.reward(j) = t.reward;
    b.done(j) = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int goal_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), goal_dim_(goal_dim), action_dim_(action_dim) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (state_dim < 0 || goal_dim < 0 || action_dim <= 0) throw std::invalid_argument("bad replay dimensions");
  state_.resize(capacity * state_dim);
  goal_.resize(capacity * goal_dim);
  action_.resize(capacity * action_dim);
  next_state_.resize(capacity * state_dim);
  reward_.resize(capacity);
  done_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
  if (static_cast<int>(t.state.size()) != state_dim_ || static_cast<int>(t.goal.size()) != goal_dim_ ||
      static_cast<int>(t.action.size()) != action_dim_ || static_cast<int>(t.next_state.size()) != state_dim_) {
    throw std::invalid_argument("transition dimensions do not match the replay buffer");
  }
  check_finite(t.state, "state");
  check_finite(t.goal, "goal");
  check_finite(t.action, "action");
  check_finite(t.next_state, "next state");
  if (!std::isfinite(t.reward)) throw std::invalid_argument("transition reward is not finite");
  const std::size_t slot = head_;
  std::copy(t.state.begin(), t.state.end(), state_.begin() + slot * state_dim_);
  std::copy(t.goal.begin(), t.goal.end(), goal_.begin() + slot * goal_dim_);
  std::copy(t.action.begin(), t.action.end(), action_.begin() + slot * action_dim_);
  std::copy(t.next_state.begin(), t.next_state.end(), next_state_.begin() + slot * state_dim_);
  reward_[slot] = t.reward;
  done_[slot] = t.done ? 1 : 0;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index out of range");
  const std::size_t slot = (head_ + capacity_ - size_ + i) % capacity_;
  Transition t;
  auto copy = [slot](const std::vector<float>& src, int dim) {
    return std::vector<double>(src.begin() + slot * dim, src.begin() + (slot + 1) * dim);
  };
  t.state = copy(state_, state_dim_);
  t.goal = copy(goal_, goal_dim_);
  t.action = copy(action_, action_dim_);
  t.next_state = copy(next_state_, state_dim_);
  t.reward = reward_[slot];
  t.done = done_[slot] != 0;
  return t;
}

void ReplayBuffer::load(std::size_t slot, Batch& b, Eigen::Index col) const {
  for (int k = 0; k < state_dim_; ++k) {
    b.state(k, col) = state_[slot * state_dim_ + k];
    b.next_state(k, col) = next_state_[slot * state_dim_ + k];
  }
  for (int k = 0; k < goal_dim_; ++k) b.goal(k, col) = goal_[slot * goal_dim_ + k];
  for (int k = 0; k < action_dim_; ++k) b.action(k, col) = action_[slot * action_dim_ + k];
  b.reward(col) = reward_[slot];
  b.done(col) = done_[slot];
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (size_ < batch_size) {
    throw std::logic_error("replay buffer holds " + std::to_string(size_) + " transitions, batch needs " +
                           std::to_string(batch_size));
  }
  const auto n = static_cast<Eigen::Index>(batch_size);
  Batch b;
  b.state.resize(state_dim_, n);
  b.goal.resize(goal_dim_, n);
  b.action.resize(action_dim_, n);
  b.next_state.resize(state_dim_, n);
  b.reward.resize(n);
  b.done.resize(n);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (Eigen::Index j = 0; j < n; ++j) load(pick(rng), b, j);
  return b;
}

void SacConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
    throw std::invalid_argument("buffer_capacity must be at least batch_size");
  }
  if (!(initial_alpha > 0.0)) throw std::invalid_argument("initial_alpha must be positive");
  if (total_steps < 0) throw std::invalid_argument("total_steps must be >= 0");
  if (update_every < 1 || updates_per_round < 0) throw std::invalid_argument("bad update cadence");
  if (eval_interval < 1) throw std::invalid_argument("eval_interval must be positive");
  if (checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be >= 0");
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be positive");
  }
}

void polyak(DenseNetwork& target, const DenseNetwork& online, double tau) {
  auto& tl = target.layers();
  const auto& ol = online.layers();
  if (tl.size() != ol.size()) throw std::invalid_argument("polyak: network shapes differ");
  for (std::size_t i = 0; i < tl.size(); ++i) {
    if (tl[i].weight.rows() != ol[i].weight.rows() || tl[i].weight.cols() != ol[i].weight.cols()) {
      throw std::invalid_argument("polyak: layer shapes differ");
    }
    if (tau == 1.0) {
      tl[i].weight = ol[i].weight;
      tl[i].bias = ol[i].bias;
    } else if (tau != 0.0) {
      tl[i].weight = (1.0 - tau) * tl[i].weight + tau * ol[i].weight;
      tl[i].bias = (1.0 - tau) * tl[i].bias + tau * ol[i].bias;
    }
  }
}

void ActionGridLookup::validate(int observation_dim, int action_dim) const {
  if (side < 2) throw std::invalid_argument("grid lookup side must be >= 2");
  if (grid_offset < 0 || grid_offset + side * side > observation_dim) {
    throw std::invalid_argument("grid lookup lies outside the observation");
  }
  if (action_x < 0 || action_x >= action_dim || action_y < 0 || action_y >= action_dim) {
    throw std::invalid_argument("grid lookup action component out of range");
  }
}

GridRead read_grid(const ActionGridLookup& lookup, const double* observation, const double* action) {
  const double scale = 0.5 * (lookup.side - 1);
  const double fx = std::clamp((action[lookup.action_x] + 1.0) * scale, 0.0, lookup.side - 1.0);
  const double fy = std::clamp((action[lookup.action_y] + 1.0) * scale, 0.0, lookup.side - 1.0);
  const int x0 = std::min(static_cast<int>(fx), lookup.side - 2);
  const int y0 = std::min(static_cast<int>(fy), lookup.side - 2);
  const double tx = fx - x0, ty = fy - y0;
  const double* g = observation + lookup.grid_offset;
  const double g00 = g[y0 * lookup.side + x0], g01 = g[y0 * lookup.side + x0 + 1];
  const double g10 = g[(y0 + 1) * lookup.side + x0], g11 = g[(y0 + 1) * lookup.side + x0 + 1];
  GridRead r;
  r.value = (1 - ty) * ((1 - tx) * g00 + tx * g01) + ty * ((1 - tx) * g10 + tx * g11);
  r.d_ax = scale * ((1 - ty) * (g01 - g00) + ty * (g11 - g10));
  r.d_ay = scale * ((1 - tx) * (g10 - g00) + tx * (g11 - g01));
  return r;
}

SacAgent::SacAgent(int observation_dim, int action_dim, const SacConfig& cfg, Rng& rng,
                   std::optional<ActionGridLookup> lookup)
    : observation_dim_(observation_dim), action_dim_(action_dim), cfg_(cfg), lookup_(lookup) {
  cfg_.validate();
  if (observation_dim < 1 || action_dim < 1) throw std::invalid_argument("SAC dimensions must be positive");
  if (lookup_) lookup_->validate(observation_dim, action_dim);
  std::vector<int> actor_sizes{observation_dim};
  actor_sizes.insert(actor_sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  actor_sizes.push_back(2 * action_dim);
  std::vector<int> critic_sizes{observation_dim + action_dim + (lookup_ ? 1 : 0)};
  critic_sizes.insert(critic_sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  critic_sizes.push_back(1);
  actor = DenseNetwork(actor_sizes, Activation::Relu, Activation::Identity, rng);
  q1 = DenseNetwork(critic_sizes, Activation::Relu, Activation::Identity, rng);
  q2 = DenseNetwork(critic_sizes, Activation::Relu, Activation::Identity, rng);
  q1_target = q1;
  q2_target = q2;
  log_alpha_ = std::log(cfg_.initial_alpha);
  actor_opt_ = Adam(actor, AdamConfig{cfg_.actor_lr});
  q1_opt_ = Adam(q1, AdamConfig{cfg_.critic_lr});
  q2_opt_ = Adam(q2, AdamConfig{cfg_.critic_lr});
  alpha_opt_ = ScalarAdam(AdamConfig{cfg_.alpha_lr});
}

double SacAgent::target_entropy() const {
  return cfg_.target_entropy.value_or(-static_cast<double>(action_dim_));
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

void SacAgent::set_log_alpha(double v) { log_alpha_ = std::clamp(v, kLogAlphaMin, kLogAlphaMax); }

Eigen::MatrixXd SacAgent::critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action) const {
  if (!lookup_) return vstack(obs, action);
  Eigen::MatrixXd in(obs.rows() + action.rows() + 1, obs.cols());
  in.topRows(obs.rows()) = obs;
  in.middleRows(obs.rows(), action.rows()) = action;
  for (Eigen::Index j = 0; j < obs.cols(); ++j) {
    in(in.rows() - 1, j) = read_grid(*lookup_, obs.col(j).data(), action.col(j).data()).value;
  }
  return in;
}

Eigen::MatrixXd SacAgent::act(const Eigen::MatrixXd& observation, Rng& rng) const {
  const auto head = actor.forward(observation);
  return squashed_gaussian(head, standard_normal(action_dim_, static_cast<int>(observation.cols()), rng)).action;
}

Eigen::MatrixXd SacAgent::act_deterministic(const Eigen::MatrixXd& observation) const {
  const auto head = actor.forward(observation);
  return head.topRows(action_dim_).array().tanh();
}

CriticTargets SacAgent::critic_targets(const Batch& batch, const Eigen::MatrixXd& next_noise) const {
  CriticTargets t;
  const Eigen::MatrixXd next_obs = batch.next_observation();
  const auto s = squashed_gaussian(actor.forward(next_obs), next_noise);
  const Eigen::MatrixXd in = critic_input(next_obs, s.action);
  t.q1_next = q1_target.forward(in).row(0).transpose();
  t.q2_next = q2_target.forward(in).row(0).transpose();
  t.min_next = t.q1_next.cwiseMin(t.q2_next);
  t.next_log_prob = s.log_prob;
  const double a = alpha();
  t.target.resize(batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    const double bootstrap = t.min_next(j) - a * t.next_log_prob(j);
    // Terminal transitions never touch the bootstrap, even if it is non-finite.
    t.target(j) = batch.done(j) != 0.0 || cfg_.gamma == 0.0
                      ? batch.reward(j)
                      : batch.reward(j) + cfg_.gamma * bootstrap;
  }
  return t;
}

double SacAgent::critic_loss(const Batch& batch, const Eigen::VectorXd& target, NetworkGradient* g1,
                             NetworkGradient* g2) const {
  const Eigen::MatrixXd in = critic_input(batch.observation(), batch.action);
  const double n = static_cast<double>(batch.size());
  double loss = 0.0;
  auto one = [&](const DenseNetwork& q, NetworkGradient* g) {
    DenseNetwork::Tape tape;
    const Eigen::MatrixXd out = q.forward(in, tape);
    const Eigen::RowVectorXd err = out.row(0) - target.transpose();
    loss += err.squaredNorm() / n;
    if (g) *g = q.backward(tape, (2.0 / n) * err);
  };
  one(q1, g1);
  one(q2, g2);
  return loss;
}

double SacAgent::actor_loss(const Batch& batch, const Eigen::MatrixXd& noise, NetworkGradient* grad,
                            Eigen::VectorXd* log_probs) const {
  const Eigen::MatrixXd obs = batch.observation();
  const double n = static_cast<double>(batch.size());
  const double a = alpha();
  DenseNetwork::Tape actor_tape;
  const Eigen::MatrixXd head = actor.forward(obs, actor_tape);
  const auto s = squashed_gaussian(head, noise);
  const Eigen::MatrixXd in = critic_input(obs, s.action);
  DenseNetwork::Tape t1, t2;
  const Eigen::RowVectorXd v1 = q1.forward(in, t1).row(0);
  const Eigen::RowVectorXd v2 = q2.forward(in, t2).row(0);
  double loss = 0.0;
  Eigen::MatrixXd up1 = Eigen::MatrixXd::Zero(1, batch.size());
  Eigen::MatrixXd up2 = Eigen::MatrixXd::Zero(1, batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    const bool first = v1(j) <= v2(j);
    loss += (a * s.log_prob(j) - (first ? v1(j) : v2(j))) / n;
    (first ? up1 : up2)(0, j) = -1.0 / n;
  }
  if (log_probs) *log_probs = s.log_prob;
  if (grad) {
    Eigen::MatrixXd din1, din2;
    q1.backward(t1, up1, &din1);
    q2.backward(t2, up2, &din2);
    const Eigen::MatrixXd din = din1 + din2;
    Eigen::MatrixXd d_action = din.middleRows(observation_dim_, action_dim_);
    if (lookup_) {
      for (Eigen::Index j = 0; j < batch.size(); ++j) {
        const GridRead r = read_grid(*lookup_, obs.col(j).data(), s.action.col(j).data());
        const double up = din(din.rows() - 1, j);
        d_action(lookup_->action_x, j) += up * r.d_ax;
        d_action(lookup_->action_y, j) += up * r.d_ay;
      }
    }
    const Eigen::VectorXd d_log_prob = Eigen::VectorXd::Constant(batch.size(), a / n);
    const Eigen::MatrixXd d_head = squashed_gaussian_backward(s, d_action, d_log_prob);
    *grad = actor.backward(actor_tape, d_head);
  }
  return loss;
}

double SacAgent::temperature_loss(const Eigen::VectorXd& log_probs, double* grad) const {
  const double m = (log_probs.array() + target_entropy()).mean();
  if (grad) *grad = -m;
  return -log_alpha_ * m;
}

double SacAgent::critic_update(const Batch& batch, Rng& rng) {
  const auto noise = standard_normal(action_dim_, static_cast<int>(batch.size()), rng);
  const auto targets = critic_targets(batch, noise);
  NetworkGradient g1, g2;
  const double loss = critic_loss(batch, targets.target, &g1, &g2);
  q1_opt_.step(q1, g1);
  q2_opt_.step(q2, g2);
  return loss;
}

double SacAgent::actor_update(const Batch& batch, Rng& rng, Eigen::VectorXd* log_probs) {
  const auto noise = standard_normal(action_dim_, static_cast<int>(batch.size()), rng);
  NetworkGradient g;
  const double loss = actor_loss(batch, noise, &g, log_probs);
  actor_opt_.step(actor, g);
  return loss;
}

double SacAgent::temperature_update(const Eigen::VectorXd& log_probs) {
  double g = 0.0;
  temperature_loss(log_probs, &g);
  double v = log_alpha_;
  alpha_opt_.step(v, g);
  set_log_alpha(v);
  return alpha();
}

void SacAgent::update_targets() {
  polyak(q1_target, q1, cfg_.tau);
  polyak(q2_target, q2, cfg_.tau);
}

UpdateStats SacAgent::update(const Batch& batch, Rng& rng) {
  UpdateStats st;
  st.critic_loss = critic_update(batch, rng);
  Eigen::VectorXd log_probs;
  st.actor_loss = actor_update(batch, rng, &log_probs);
  st.entropy = -log_probs.mean();
  st.alpha_loss = temperature_loss(log_probs, nullptr);
  st.alpha = temperature_update(log_probs);
  update_targets();
  return st;
}

}  // namespace sketchrl
