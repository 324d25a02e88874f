#include "sketchrl/training.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "sketchrl/evaluation.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace sketchrl {

using nlohmann::json;

namespace {

// Batch-sized temporaries sit just above glibc's default mmap threshold, so
// every update would otherwise map and unmap pages.
void keep_heap_pages() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    return true;
  }();
  (void)once;
#endif
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> uniform_action(int dim, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(dim);
  for (auto& x : a) x = u(rng);
  return a;
}

std::vector<double> column(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.rows()}; }

// Running means of update statistics between metric records.
struct UpdateAverages {
  double critic = 0, actor = 0, alpha = 0, entropy = 0, disc = 0;
  long long n = 0, disc_n = 0;

  void add(const UpdateStats& s) {
    critic += s.critic_loss;
    actor += s.actor_loss;
    alpha = s.alpha;
    entropy += s.entropy;
    ++n;
  }
  void write(json& r) const {
    r["updates"] = n;
    r["critic_loss"] = n ? critic / n : 0.0;
    r["actor_loss"] = n ? actor / n : 0.0;
    r["entropy"] = n ? entropy / n : 0.0;
  }
};

void add_agent(Checkpoint& c, const SacAgent& agent) {
  c.add_network("actor", agent.actor);
  c.add_network("q1", agent.q1);
  c.add_network("q2", agent.q2);
  c.add_network("q1_target", agent.q1_target);
  c.add_network("q2_target", agent.q2_target);
  c.add_scalar("log_alpha", agent.log_alpha());
}

void add_discriminator(Checkpoint& c, const Discriminator& d) {
  c.add_network("discriminator", d.raw_network());
  for (std::size_t i = 0; i < d.left_vectors().size(); ++i) {
    const auto& u = d.left_vectors()[i];
    const auto& v = d.right_vectors()[i];
    c.tensors.push_back({"discriminator.u." + std::to_string(i), u.size(), 1, {u.data(), u.data() + u.size()}});
    c.tensors.push_back({"discriminator.v." + std::to_string(i), v.size(), 1, {v.data(), v.data() + v.size()}});
  }
}

std::string header_excerpt(const Checkpoint& c) {
  json h = {{"kind", c.meta.value("kind", json())},
            {"observation_dim", c.meta.value("observation_dim", json())},
            {"action_dim", c.meta.value("action_dim", json())}};
  return h.dump();
}

}  // namespace

TargetDataset commander_train_set(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  const int side = cfg.canvas.pixels_per_side;
  if (!cfg.commander.train_dataset.empty()) {
    std::filesystem::path p = cfg.commander.train_dataset;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    auto d = load_dataset(p);
    if (d.width != side || d.height != side) {
      throw std::invalid_argument("training dataset " + p.string() + " is " + std::to_string(d.width) + "x" +
                                  std::to_string(d.height) + ", canvas is " + std::to_string(side));
    }
    if (d.size() == 0) throw std::invalid_argument("training dataset " + p.string() + " is empty");
    return d;
  }
  return generate_dataset(cfg.commander.train_shapes, cfg.commander.train_count, cfg.commander.train_seed, side, side);
}

TargetDataset commander_eval_set(const RunConfig& cfg) {
  const int side = cfg.canvas.pixels_per_side;
  return generate_dataset(cfg.commander.eval_shapes, cfg.commander.eval_count, cfg.commander.eval_seed, side, side);
}

TrainResult train_commander(const RunConfig& cfg, const TargetDataset& train, const TargetDataset& eval,
                            const TrainHooks& hooks) {
  cfg.validate();
  keep_heap_pages();
  const auto& cc = cfg.commander;
  const SacConfig& sc = cc.sac;
  const int side = cfg.canvas.pixels_per_side;
  if (train.size() == 0) throw std::invalid_argument("commander training needs at least one target");
  if (eval.size() == 0) throw std::invalid_argument("commander evaluation needs at least one target");
  for (const auto* d : {&train, &eval}) {
    if (d->width != side || d->height != side) throw std::invalid_argument("dataset dimensions differ from the canvas");
  }

  Rng rng(sc.seed);
  const auto [sd, gd] = commander_feature_dims(side, side, cc.episode, cc.observation);
  std::optional<ActionGridLookup> lookup;
  if (cc.observation.gain_map) {
    const int g = cc.episode.boundary_side + 1;
    lookup = ActionGridLookup{sd - g * g, g, 1, 2};
  }
  SacAgent agent(sd + gd, 3, sc, rng, lookup);
  ReplayBuffer buffer(sc.buffer_capacity, sd, gd, 3);
  const CommanderEnv env(side, side, cc.episode);

  std::shared_ptr<Discriminator> disc;
  std::unique_ptr<SimilarityProvider> sim;
  if (cc.similarity == SimilarityKind::Adversarial) {
    disc = std::make_shared<Discriminator>(side, side, cc.discriminator, rng);
    sim = std::make_unique<AdversarialSimilarity>(disc);
  } else {
    sim = std::make_unique<L2Similarity>();
  }
  // Recently visited (canvas, target index) pairs: the discriminator's fakes.
  std::vector<std::pair<Canvas, std::size_t>> visited;
  std::size_t visited_head = 0;
  const std::size_t visited_cap = static_cast<std::size_t>(sc.batch_size);

  auto make_checkpoint = [&](long long steps) {
    Checkpoint c;
    c.meta = {{"kind", "commander"},
              {"steps", steps},
              {"state_dim", sd},
              {"goal_dim", gd},
              {"observation_dim", sd + gd},
              {"action_dim", 3},
              {"critic_grid_lookup", lookup ? json{{"offset", lookup->grid_offset}, {"side", lookup->side}} : json()},
              {"canvas", run_config_to_json(cfg)["canvas"]},
              {"commander", run_config_to_json(cfg)["commander"]}};
    add_agent(c, agent);
    if (disc) add_discriminator(c, *disc);
    return c;
  };

  TrainResult result;
  UpdateAverages avg;
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::size_t target_idx = 0;
  CommanderState state{Canvas(side, side), {}, 0};
  CommanderFeatures feat;
  double score = 0.0, ep_return = 0.0, return_sum = 0.0;
  long long episodes = 0, episodes_since = 0;
  bool need_reset = true;
  const int hindsight = disc ? 0 : cc.hindsight_goals;
  std::vector<CommanderState> visited_states;
  std::vector<std::vector<double>> episode_actions;
  const L2Similarity l2;
  // Each step is stored again with goals taken from canvases reached later in
  // the same episode, with the L2 reward recomputed against that goal.
  auto relabel = [&] {
    const std::size_t n = episode_actions.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> later(i + 1, n);
      for (int k = 0; k < hindsight; ++k) {
        const Canvas& goal = visited_states[later(rng)].canvas;
        const auto& cur = visited_states[i];
        const auto& next = visited_states[i + 1];
        const auto f = commander_features(cur, goal, cc.episode, cc.observation);
        const auto nf = commander_features(next, goal, cc.episode, cc.observation);
        const double r = l2.score(next.canvas, goal) - l2.score(cur.canvas, goal);
        buffer.push({f.state, f.goal, episode_actions[i], r * sc.reward_scale, nf.state,
                     next.t == cc.episode.episode_length});
      }
    }
  };

  for (long long step = 0; step < sc.total_steps; ++step) {
    if (need_reset) {
      target_idx = pick(rng);
      state = env.reset(train.targets[target_idx]);
      feat = commander_features(state, train.targets[target_idx], cc.episode, cc.observation);
      score = sim->score(state.canvas, train.targets[target_idx]);
      ep_return = 0.0;
      need_reset = false;
      visited_states.assign(1, state);
      episode_actions.clear();
    }
    const Canvas& target = train.targets[target_idx];
    std::vector<double> action;
    if (step < sc.start_steps) {
      action = uniform_action(3, rng);
    } else {
      action = column(agent.act(to_vector(concat(feat.state, feat.goal)), rng));
    }
    const StrokeCommand cmd = command_from_action(action.data());
    double next_score = 0.0;
    CommanderStep st = disc ? env.step(state, cmd, target, *sim) : env.step(state, cmd, target, *sim, score, &next_score);
    score = next_score;
    auto next_feat = commander_features(st.next, target, cc.episode, cc.observation);
    buffer.push({feat.state, feat.goal, action, st.reward * sc.reward_scale, next_feat.state, st.done});
    ep_return += st.reward;
    if (hindsight > 0) {
      visited_states.push_back(st.next);
      episode_actions.push_back(action);
    }
    if (disc) {
      if (visited.size() < visited_cap) {
        visited.emplace_back(st.next.canvas, target_idx);
      } else {
        visited[visited_head] = {st.next.canvas, target_idx};
        visited_head = (visited_head + 1) % visited_cap;
      }
    }
    state = std::move(st.next);
    feat = std::move(next_feat);
    if (st.done) {
      if (hindsight > 0) relabel();
      need_reset = true;
      ++episodes;
      ++episodes_since;
      return_sum += ep_return;
    }

    const long long done_steps = step + 1;
    if (done_steps > sc.update_after && done_steps % sc.update_every == 0 &&
        buffer.size() >= static_cast<std::size_t>(sc.batch_size)) {
      for (int u = 0; u < sc.updates_per_round; ++u) {
        const Batch b = buffer.sample(sc.batch_size, rng);
        avg.add(agent.update(b, rng));
        if (disc) {
          std::vector<Discriminator::CanvasPair> real, fake;
          for (const auto& [canvas, idx] : visited) {
            fake.push_back({&canvas, &train.targets[idx]});
            real.push_back({&train.targets[idx], &train.targets[idx]});
          }
          avg.disc += disc->update(real, fake);
          ++avg.disc_n;
        }
      }
    }

    if (done_steps % sc.eval_interval == 0) {
      SacCommanderPolicy policy(agent.actor, cc.episode, cc.observation);
      const auto ev = evaluate_commander(policy, eval.targets, cc.episode);
      json r = {{"step", done_steps}, {"episodes", episodes}};
      avg.write(r);
      r["alpha"] = agent.alpha();
      r["train_return"] = episodes_since ? return_sum / episodes_since : 0.0;
      if (disc) r["discriminator_loss"] = avg.disc_n ? avg.disc / avg.disc_n : 0.0;
      r["eval_l2_mean"] = ev.l2.mean;
      r["eval_l2_std"] = ev.l2.stddev;
      if (hooks.on_metric) hooks.on_metric(r);
      result.metrics.push_back(std::move(r));
      avg = {};
      return_sum = 0.0;
      episodes_since = 0;
    }
    if (sc.checkpoint_interval > 0 && done_steps % sc.checkpoint_interval == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(done_steps, make_checkpoint(done_steps));
    }
  }
  result.checkpoint = make_checkpoint(sc.total_steps);
  return result;
}

TrainResult train_stroker(const RunConfig& cfg, const KinematicChain& chain, const TrainHooks& hooks) {
  cfg.validate();
  keep_heap_pages();
  const auto& scfg = cfg.stroker;
  const SacConfig& sc = scfg.sac;
  const StrokerEnv env(chain, scfg.env);
  Rng rng(sc.seed);
  constexpr int sd = kJointCount, gd = 3;
  SacAgent agent(sd + gd, kJointCount, sc, rng);
  ReplayBuffer buffer(sc.buffer_capacity, sd, gd, kJointCount);

  auto make_checkpoint = [&](long long steps) {
    Checkpoint c;
    c.meta = {{"kind", "stroker"},
              {"steps", steps},
              {"state_dim", sd},
              {"goal_dim", gd},
              {"observation_dim", sd + gd},
              {"action_dim", kJointCount},
              {"max_joint_delta", scfg.env.max_joint_delta},
              {"chain", json::parse(chain_to_json(chain))},
              {"stroker", run_config_to_json(cfg)["stroker"]}};
    add_agent(c, agent);
    return c;
  };

  TrainResult result;
  UpdateAverages avg;
  JointVector joints = scfg.env.schedule.initial_poses.front();
  double reward_sum = 0.0, dist_sum = 0.0;
  long long since = 0;

  for (long long step = 0; step < sc.total_steps; ++step) {
    joints = schedule_reset(scfg.env.schedule, step, joints, rng);
    const StrokerState state = env.state_at(joints);
    const StrokerGoal goal = sample_goal(rng, scfg.env);
    const auto sf = stroker_state_features(chain, joints);
    const auto gf = stroker_goal_features(goal.command);
    std::vector<double> action;
    if (step < sc.start_steps) {
      action = uniform_action(kJointCount, rng);
    } else {
      action = column(agent.act(to_vector(concat(sf, gf)), rng));
    }
    StrokerAction delta{};
    for (int i = 0; i < kJointCount; ++i) delta[i] = action[i] * scfg.env.max_joint_delta;
    const StrokerStep st = env.step(state, delta, goal);
    buffer.push({sf, gf, action, st.reward * sc.reward_scale, stroker_state_features(chain, st.joints), true});
    reward_sum += st.reward;
    dist_sum += (st.reached_displacement - goal.displacement).norm();
    ++since;
    joints = st.joints;

    const long long done_steps = step + 1;
    if (done_steps > sc.update_after && done_steps % sc.update_every == 0 &&
        buffer.size() >= static_cast<std::size_t>(sc.batch_size)) {
      for (int u = 0; u < sc.updates_per_round; ++u) avg.add(agent.update(buffer.sample(sc.batch_size, rng), rng));
    }

    if (done_steps % sc.eval_interval == 0) {
      const auto ev = evaluate_stroker(policy_executor_factory(agent.actor, chain, scfg.env), chain, scfg.env,
                                       scfg.eval_goals, scfg.eval_seed);
      json r = {{"step", done_steps}};
      avg.write(r);
      r["alpha"] = agent.alpha();
      r["train_reward"] = since ? reward_sum / since : 0.0;
      r["train_position_error_cm"] = since ? dist_sum / since : 0.0;
      r["eval_position_error_cm"] = ev.position_cm.mean;
      r["eval_position_error_std"] = ev.position_cm.stddev;
      r["eval_angle_error_rad"] = ev.angle_rad.mean;
      r["eval_roll_error_rad"] = ev.roll_rad.mean;
      r["eval_pitch_error_rad"] = ev.pitch_rad.mean;
      if (hooks.on_metric) hooks.on_metric(r);
      result.metrics.push_back(std::move(r));
      avg = {};
      reward_sum = dist_sum = 0.0;
      since = 0;
    }
    if (sc.checkpoint_interval > 0 && done_steps % sc.checkpoint_interval == 0 && hooks.on_checkpoint) {
      hooks.on_checkpoint(done_steps, make_checkpoint(done_steps));
    }
  }
  result.checkpoint = make_checkpoint(sc.total_steps);
  return result;
}

DenseNetwork commander_actor(const Checkpoint& ckpt, const RunConfig& cfg) {
  if (ckpt.meta.value("kind", "") != "commander") {
    throw std::runtime_error("not a commander checkpoint (header " + header_excerpt(ckpt) + ")");
  }
  const int side = cfg.canvas.pixels_per_side;
  const auto [sd, gd] = commander_feature_dims(side, side, cfg.commander.episode, cfg.commander.observation);
  if (ckpt.meta.value("observation_dim", -1) != sd + gd || ckpt.meta.value("action_dim", -1) != 3) {
    throw std::runtime_error("commander checkpoint header " + header_excerpt(ckpt) + " does not match the config (observation_dim " +
                             std::to_string(sd + gd) + ", action_dim 3)");
  }
  DenseNetwork actor = ckpt.network("actor");
  if (actor.input_dim() != sd + gd || actor.output_dim() != 6) {
    throw std::runtime_error("commander actor shape disagrees with its header " + header_excerpt(ckpt));
  }
  return actor;
}

DenseNetwork stroker_actor(const Checkpoint& ckpt) {
  if (ckpt.meta.value("kind", "") != "stroker") {
    throw std::runtime_error("not a stroker checkpoint (header " + header_excerpt(ckpt) + ")");
  }
  DenseNetwork actor = ckpt.network("actor");
  if (ckpt.meta.value("observation_dim", -1) != kJointCount + 3 || actor.input_dim() != kJointCount + 3 ||
      actor.output_dim() != 2 * kJointCount) {
    throw std::runtime_error("stroker checkpoint header " + header_excerpt(ckpt) + " does not match a 6-joint chain");
  }
  return actor;
}

}  // namespace sketchrl
