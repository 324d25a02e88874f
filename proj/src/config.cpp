#include "sketchrl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "sketchrl/dataset.hpp"

namespace sketchrl {

using nlohmann::json;

namespace {

// Object reader that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument(where() + " must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      throw std::invalid_argument(where(key) + ": " + e.what());
    }
  }

  std::optional<Section> sub(const char* key) {
    if (!j_.contains(key)) return std::nullopt;
    used_.insert(key);
    return Section(j_.at(key), where(key));
  }

  const json* raw(const char* key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw std::invalid_argument("unknown key " + where(it.key().c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_;
    if (key) p += (p.empty() ? "" : ".") + std::string(key);
    return p.empty() ? "<root>" : p;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

json hidden_json(const std::vector<int>& h) { return json(h); }

std::vector<int> parse_hidden(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + " must be a list of layer widths");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1) throw std::invalid_argument(where + " entries must be positive integers");
    out.push_back(v.get<int>());
  }
  return out;
}

json weights_json(const StrokerRewardWeights& w) {
  return {{"position", w.position}, {"z", w.z}, {"cosine", w.cosine}, {"rotation", w.rotation}};
}

std::string obs_kind_name(CommanderObservationConfig::Kind k) {
  return k == CommanderObservationConfig::Kind::Full ? "full" : "egocentric";
}

}  // namespace

std::string similarity_name(SimilarityKind k) { return k == SimilarityKind::L2 ? "l2" : "adversarial"; }

SimilarityKind similarity_from_name(const std::string& name) {
  if (name == "l2") return SimilarityKind::L2;
  if (name == "adversarial") return SimilarityKind::Adversarial;
  throw std::invalid_argument("unknown similarity '" + name + "' (expected l2 or adversarial)");
}

json sac_config_to_json(const SacConfig& c) {
  json j = {{"gamma", c.gamma},
            {"tau", c.tau},
            {"actor_lr", c.actor_lr},
            {"critic_lr", c.critic_lr},
            {"alpha_lr", c.alpha_lr},
            {"batch_size", c.batch_size},
            {"buffer_capacity", c.buffer_capacity},
            {"target_entropy", nullptr},
            {"initial_alpha", c.initial_alpha},
            {"hidden", hidden_json(c.hidden)},
            {"total_steps", c.total_steps},
            {"start_steps", c.start_steps},
            {"update_after", c.update_after},
            {"update_every", c.update_every},
            {"updates_per_round", c.updates_per_round},
            {"reward_scale", c.reward_scale},
            {"eval_interval", c.eval_interval},
            {"checkpoint_interval", c.checkpoint_interval},
            {"seed", c.seed}};
  if (c.target_entropy) j["target_entropy"] = *c.target_entropy;
  return j;
}

namespace {

SacConfig read_sac(Section s, SacConfig c) {
  s.get("gamma", c.gamma);
  s.get("tau", c.tau);
  s.get("actor_lr", c.actor_lr);
  s.get("critic_lr", c.critic_lr);
  s.get("alpha_lr", c.alpha_lr);
  s.get("batch_size", c.batch_size);
  s.get("buffer_capacity", c.buffer_capacity);
  if (const json* te = s.raw("target_entropy")) {
    if (te->is_null()) {
      c.target_entropy.reset();
    } else if (te->is_number()) {
      c.target_entropy = te->get<double>();
    } else {
      throw std::invalid_argument(s.where("target_entropy") + ": expected a number or null");
    }
  }
  s.get("initial_alpha", c.initial_alpha);
  if (const json* h = s.raw("hidden")) c.hidden = parse_hidden(*h, s.where("hidden"));
  s.get("total_steps", c.total_steps);
  s.get("start_steps", c.start_steps);
  s.get("update_after", c.update_after);
  s.get("update_every", c.update_every);
  s.get("updates_per_round", c.updates_per_round);
  s.get("reward_scale", c.reward_scale);
  s.get("eval_interval", c.eval_interval);
  s.get("checkpoint_interval", c.checkpoint_interval);
  s.get("seed", c.seed);
  s.finish();
  try {
    c.validate();
    check(c.actor_lr > 0 && c.critic_lr > 0 && c.alpha_lr >= 0, "learning rates must be positive");
    check(c.reward_scale > 0, "reward_scale must be positive");
    check(c.start_steps >= 0 && c.update_after >= 0, "start_steps and update_after must be >= 0");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(s.where() + ": " + e.what());
  }
  return c;
}

}  // namespace

SacConfig parse_sac_config(const json& j, SacConfig base) { return read_sac(Section(j, "sac"), std::move(base)); }

RunConfig default_run_config() {
  RunConfig c;

  auto& cs = c.commander.sac;
  cs.hidden = {128, 128};
  cs.batch_size = 128;
  cs.buffer_capacity = 100000;
  cs.gamma = 0.9;
  cs.total_steps = 100000;
  cs.start_steps = 5000;
  cs.update_after = 5000;
  cs.update_every = 2;
  cs.reward_scale = 1764.0;  // pixel count: per-step rewards become pixel-count changes
  cs.eval_interval = 10000;
  cs.seed = 11;

  auto& ss = c.stroker.sac;
  ss.hidden = {128, 128};
  ss.batch_size = 128;
  ss.buffer_capacity = 100000;
  ss.gamma = 0.0;  // one-step episodes
  ss.total_steps = 150000;
  ss.start_steps = 2000;
  ss.update_after = 2000;
  ss.reward_scale = 0.1;
  ss.eval_interval = 10000;
  ss.seed = 21;

  c.stroker.env.mapping = c.canvas;
  c.deployment.noise.seed = 31;
  return c;
}

RunConfig parse_run_config(const json& j, RunConfig c) {
  Section root(j, "");
  if (auto s = root.sub("canvas")) {
    s->get("pixels_per_side", c.canvas.pixels_per_side);
    s->get("centimeters_per_side", c.canvas.centimeters_per_side);
    s->finish();
  }
  if (auto s = root.sub("commander")) {
    auto& m = c.commander;
    if (auto e = s->sub("episode")) {
      e->get("episode_length", m.episode.episode_length);
      e->get("boundary_side", m.episode.boundary_side);
      if (const json* sp = e->raw("start_pos")) {
        if (sp->is_null()) {
          m.episode.start_pos.reset();
        } else if (sp->is_array() && sp->size() == 2 && (*sp)[0].is_number_integer() && (*sp)[1].is_number_integer()) {
          m.episode.start_pos = PixelCoord{(*sp)[0].get<int>(), (*sp)[1].get<int>()};
        } else {
          throw std::invalid_argument(e->where("start_pos") + ": expected [x, y] or null");
        }
      }
      e->finish();
    }
    if (auto o = s->sub("observation")) {
      std::string kind = obs_kind_name(m.observation.kind);
      o->get("kind", kind);
      if (kind == "egocentric") {
        m.observation.kind = CommanderObservationConfig::Kind::Egocentric;
      } else if (kind == "full") {
        m.observation.kind = CommanderObservationConfig::Kind::Full;
      } else {
        throw std::invalid_argument(o->where("kind") + ": expected egocentric or full");
      }
      o->get("crop", m.observation.crop);
      o->get("pool", m.observation.pool);
      o->get("gain_map", m.observation.gain_map);
      o->finish();
    }
    std::string sim = similarity_name(m.similarity);
    s->get("similarity", sim);
    m.similarity = similarity_from_name(sim);
    if (auto d = s->sub("discriminator")) {
      if (const json* h = d->raw("hidden")) m.discriminator.hidden = parse_hidden(*h, d->where("hidden"));
      d->get("power_iterations", m.discriminator.power_iterations);
      d->get("learning_rate", m.discriminator.learning_rate);
      d->get("beta1", m.discriminator.beta1);
      d->get("beta2", m.discriminator.beta2);
      d->get("zero_init_output", m.discriminator.zero_init_output);
      d->finish();
    }
    if (auto sac = s->sub("sac")) m.sac = read_sac(*sac, m.sac);
    s->get("hindsight_goals", m.hindsight_goals);
    if (auto d = s->sub("data")) {
      d->get("train_shapes", m.train_shapes);
      d->get("train_count", m.train_count);
      d->get("train_seed", m.train_seed);
      d->get("train_dataset", m.train_dataset);
      d->get("eval_shapes", m.eval_shapes);
      d->get("eval_count", m.eval_count);
      d->get("eval_seed", m.eval_seed);
      d->finish();
    }
    s->finish();
  }
  if (auto s = root.sub("stroker")) {
    auto& m = c.stroker;
    s->get("chain_file", m.chain_file);
    s->get("boundary_side", m.env.boundary_side);
    s->get("hover_height_cm", m.env.hover_height_cm);
    s->get("max_joint_delta", m.env.max_joint_delta);
    s->get("preferred_roll", m.env.preferred_roll);
    s->get("preferred_pitch", m.env.preferred_pitch);
    s->get("displacement_goals", m.env.displacement_goals);
    if (auto w = s->sub("reward_weights")) {
      w->get("position", m.env.weights.position);
      w->get("z", m.env.weights.z);
      w->get("cosine", m.env.weights.cosine);
      w->get("rotation", m.env.weights.rotation);
      w->finish();
    }
    if (auto p = s->sub("pose_schedule")) {
      p->get("goals_per_reinit", m.env.schedule.goals_per_reinit);
      if (const json* poses = p->raw("initial_poses")) {
        if (!poses->is_array()) throw std::invalid_argument(p->where("initial_poses") + ": expected a list");
        m.env.schedule.initial_poses.clear();
        for (const auto& q : *poses) {
          if (!q.is_array() || q.size() != kJointCount) {
            throw std::invalid_argument(p->where("initial_poses") + ": each pose needs 6 joint angles");
          }
          JointVector v{};
          for (int i = 0; i < kJointCount; ++i) {
            if (!q[i].is_number()) throw std::invalid_argument(p->where("initial_poses") + ": joint angles must be numbers");
            v[i] = q[i].get<double>();
          }
          m.env.schedule.initial_poses.push_back(v);
        }
      }
      p->finish();
    }
    if (auto sac = s->sub("sac")) m.sac = read_sac(*sac, m.sac);
    if (auto e = s->sub("eval")) {
      e->get("goals", m.eval_goals);
      e->get("seed", m.eval_seed);
      e->finish();
    }
    s->finish();
  }
  if (auto s = root.sub("deployment")) {
    s->get("sync", c.deployment.sync);
    s->get("contact_threshold_cm", c.deployment.contact_threshold_cm);
    if (auto n = s->sub("noise")) {
      n->get("position_sigma_cm", c.deployment.noise.position_sigma_cm);
      n->get("z_sigma_cm", c.deployment.noise.z_sigma_cm);
      n->get("rotation_sigma", c.deployment.noise.rotation_sigma);
      n->get("seed", c.deployment.noise.seed);
      n->finish();
    }
    s->finish();
  }
  root.finish();
  c.stroker.env.mapping = c.canvas;
  c.validate();
  return c;
}

void RunConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(section) + ": " + e.what());
    }
  };
  wrap("canvas", [&] { canvas.validate(); });
  wrap("commander.episode", [&] { commander.episode.validate(); });
  wrap("commander.observation", [&] { commander.observation.validate(); });
  wrap("commander.sac", [&] { commander.sac.validate(); });
  wrap("commander.discriminator", [&] {
    const auto& d = commander.discriminator;
    check(!d.hidden.empty(), "hidden must list at least one layer");
    for (int h : d.hidden) check(h >= 1, "hidden widths must be positive");
    check(d.power_iterations >= 1, "power_iterations must be >= 1");
    check(d.learning_rate > 0, "learning_rate must be positive");
    check(d.beta1 >= 0 && d.beta1 < 1 && d.beta2 >= 0 && d.beta2 < 1, "betas must lie in [0, 1)");
  });
  wrap("commander", [&] { check(commander.hindsight_goals >= 0, "hindsight_goals must be >= 0"); });
  wrap("commander.data", [&] {
    check(commander.train_count >= 1 || !commander.train_dataset.empty(), "train_count must be positive");
    check(commander.eval_count >= 1, "eval_count must be positive");
    parse_shape_spec(commander.train_shapes);
    parse_shape_spec(commander.eval_shapes);
  });
  if (commander.episode.start_pos) {
    const auto p = *commander.episode.start_pos;
    check(p.x >= 0 && p.y >= 0 && p.x < canvas.pixels_per_side && p.y < canvas.pixels_per_side,
          "commander.episode.start_pos lies outside the canvas");
  }
  wrap("stroker.sac", [&] { stroker.sac.validate(); });
  wrap("stroker", [&] {
    check(stroker.env.boundary_side == commander.episode.boundary_side,
          "boundary_side must equal commander.episode.boundary_side");
    check(stroker.eval_goals >= 1, "eval.goals must be positive");
    check(stroker.env.mapping.pixels_per_side == canvas.pixels_per_side &&
              stroker.env.mapping.centimeters_per_side == canvas.centimeters_per_side,
          "canvas mapping out of sync");
    if (stroker.chain_file.empty()) stroker.env.validate(default_chain());
  });
  wrap("deployment", [&] {
    check(deployment.contact_threshold_cm >= 0, "contact_threshold_cm must be >= 0");
    deployment.noise.validate();
  });
}

RunConfig parse_run_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config_text(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

json run_config_to_json(const RunConfig& c) {
  const auto& m = c.commander;
  json episode = {{"episode_length", m.episode.episode_length},
                  {"boundary_side", m.episode.boundary_side},
                  {"start_pos", nullptr}};
  if (m.episode.start_pos) episode["start_pos"] = {m.episode.start_pos->x, m.episode.start_pos->y};
  json poses = json::array();
  for (const auto& q : c.stroker.env.schedule.initial_poses) poses.push_back(q);
  const auto& s = c.stroker;
  return {
      {"canvas", {{"pixels_per_side", c.canvas.pixels_per_side}, {"centimeters_per_side", c.canvas.centimeters_per_side}}},
      {"commander",
       {{"episode", episode},
        {"observation", {{"kind", obs_kind_name(m.observation.kind)}, {"crop", m.observation.crop}, {"pool", m.observation.pool}, {"gain_map", m.observation.gain_map}}},
        {"similarity", similarity_name(m.similarity)},
        {"discriminator",
         {{"hidden", hidden_json(m.discriminator.hidden)},
          {"power_iterations", m.discriminator.power_iterations},
          {"learning_rate", m.discriminator.learning_rate},
          {"beta1", m.discriminator.beta1},
          {"beta2", m.discriminator.beta2},
          {"zero_init_output", m.discriminator.zero_init_output}}},
        {"sac", sac_config_to_json(m.sac)},
        {"hindsight_goals", m.hindsight_goals},
        {"data",
         {{"train_shapes", m.train_shapes},
          {"train_count", m.train_count},
          {"train_seed", m.train_seed},
          {"train_dataset", m.train_dataset},
          {"eval_shapes", m.eval_shapes},
          {"eval_count", m.eval_count},
          {"eval_seed", m.eval_seed}}}}},
      {"stroker",
       {{"chain_file", s.chain_file},
        {"boundary_side", s.env.boundary_side},
        {"hover_height_cm", s.env.hover_height_cm},
        {"max_joint_delta", s.env.max_joint_delta},
        {"preferred_roll", s.env.preferred_roll},
        {"preferred_pitch", s.env.preferred_pitch},
        {"displacement_goals", s.env.displacement_goals},
        {"reward_weights", weights_json(s.env.weights)},
        {"pose_schedule", {{"goals_per_reinit", s.env.schedule.goals_per_reinit}, {"initial_poses", poses}}},
        {"sac", sac_config_to_json(s.sac)},
        {"eval", {{"goals", s.eval_goals}, {"seed", s.eval_seed}}}}},
      {"deployment",
       {{"sync", c.deployment.sync},
        {"contact_threshold_cm", c.deployment.contact_threshold_cm},
        {"noise",
         {{"position_sigma_cm", c.deployment.noise.position_sigma_cm},
          {"z_sigma_cm", c.deployment.noise.z_sigma_cm},
          {"rotation_sigma", c.deployment.noise.rotation_sigma},
          {"seed", c.deployment.noise.seed}}}}}};
}

KinematicChain resolve_chain(const RunConfig& c, const std::filesystem::path& base_dir) {
  if (c.stroker.chain_file.empty()) return default_chain();
  std::filesystem::path p = c.stroker.chain_file;
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  KinematicChain chain = load_chain(p);
  try {
    c.stroker.env.validate(chain);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("stroker (chain " + p.string() + "): " + e.what());
  }
  return chain;
}

std::filesystem::path default_config_path() {
  const char* v = std::getenv("SKETCHRL_CONFIG");
  return v && *v ? std::filesystem::path(v) : std::filesystem::path();
}

}  // namespace sketchrl
