#include "sketchrl/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sketchrl {

using nlohmann::json;

Stats summarize(std::span<const double> values) {
  Stats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / values.size());
  return s;
}

CommanderEval evaluate_commander(CommanderPolicy& commander, const std::vector<Canvas>& targets,
                                 const CommanderEpisodeConfig& episode) {
  if (targets.empty()) throw std::invalid_argument("evaluation needs at least one target");
  CommanderEval out;
  for (const auto& t : targets) out.per_target.push_back(l2_distance(commander_rollout(t, commander, episode), t));
  out.l2 = summarize(out.per_target);
  return out;
}

StrokerEval evaluate_stroker(const ExecutorFactory& make_executor, const KinematicChain& chain,
                             const StrokerConfig& cfg, int goals, std::uint64_t seed) {
  if (goals < 1) throw std::invalid_argument("stroker evaluation needs at least one goal");
  if (cfg.schedule.initial_poses.empty()) throw std::invalid_argument("pose schedule is empty");
  const StrokerEnv env(chain, cfg);
  Rng rng(seed);
  std::vector<double> pos, ang, roll, pitch;
  for (int i = 0; i < goals; ++i) {
    const std::size_t k = rng() % cfg.schedule.initial_poses.size();
    const JointVector start = cfg.schedule.initial_poses[k];
    const StrokerGoal goal = sample_goal(rng, cfg);
    auto exec = make_executor(start);
    const PenPose before = exec->current();
    const PenPose reached = exec->execute(goal).reached;
    pos.push_back((env.displacement(before, reached) - goal.displacement).norm());
    const double dr = reached.roll - cfg.preferred_roll, dp = reached.pitch - cfg.preferred_pitch;
    ang.push_back(std::hypot(dr, dp));
    roll.push_back(std::abs(dr));
    pitch.push_back(std::abs(dp));
  }
  return {summarize(pos), summarize(ang), summarize(roll), summarize(pitch)};
}

ExecutorFactory policy_executor_factory(const DenseNetwork& actor, const KinematicChain& chain,
                                        const StrokerConfig& cfg) {
  return [actor, chain, cfg](const JointVector& start) -> std::unique_ptr<StrokeExecutor> {
    return std::make_unique<PolicyStroker>(actor, chain, cfg, start);
  };
}

ExecutorFactory perfect_executor_factory(const KinematicChain& chain, const StrokerConfig& cfg) {
  return [chain, cfg](const JointVector& start) -> std::unique_ptr<StrokeExecutor> {
    return std::make_unique<PerfectStroker>(forward_kinematics(chain, start), cfg);
  };
}

JointVector deployment_start_pose(const KinematicChain& chain, const StrokerConfig& cfg, PixelCoord pixel) {
  if (cfg.schedule.initial_poses.empty()) throw std::invalid_argument("pose schedule is empty");
  double best = std::numeric_limits<double>::infinity();
  JointVector out{};
  for (const auto& q : cfg.schedule.initial_poses) {
    const auto p = physical_to_pixel(forward_kinematics(chain, q).position, cfg.mapping);
    const double d = std::hypot(p.x - pixel.x, p.y - pixel.y);
    if (d < best) {
      best = d;
      out = q;
    }
  }
  return out;
}

namespace {

double disagreement(const Canvas& a, const Canvas& b) {
  const auto ca = a.cells(), cb = b.cells();
  std::size_t n = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) n += ca[i] != cb[i];
  return static_cast<double>(n) / ca.size();
}

}  // namespace

SyncAblation sync_ablation(const std::vector<Canvas>& targets, CommanderPolicy& commander,
                           const ExecutorFactory& make_executor, const KinematicChain& chain,
                           const CanvasMapping& mapping, const CommanderEpisodeConfig& episode,
                           const StrokerConfig& stroker, const DeploymentConfig& cfg, int runs) {
  if (targets.empty()) throw std::invalid_argument("sync ablation needs at least one target");
  if (runs < 1) throw std::invalid_argument("sync ablation needs at least one run");
  const JointVector start =
      deployment_start_pose(chain, stroker, episode.start_for(mapping.pixels_per_side, mapping.pixels_per_side));
  SyncAblation out;
  out.runs = runs;
  std::vector<double> dis_s, dis_n, l2_s, l2_n;
  for (int i = 0; i < runs; ++i) {
    const Canvas& target = targets[i % targets.size()];
    const Canvas intended = commander_rollout(target, commander, episode);
    DeploymentConfig c = cfg;
    c.noise.seed = cfg.noise.seed + static_cast<std::uint64_t>(i);

    c.sync = true;
    auto ex_s = make_executor(start);
    const auto rs = sketch(target, commander, *ex_s, mapping, episode, stroker, c);
    c.sync = false;
    auto ex_n = make_executor(start);
    const auto rn = sketch(target, commander, *ex_n, mapping, episode, stroker, c);

    // Recheck the per-step invariant from the trace.
    Canvas real(target.width(), target.height()), imag(target.width(), target.height());
    for (const auto& r : rs.trace.records) {
      rasterize_segment(real, r.real_from, r.real_to, r.contact);
      rasterize_segment(imag, r.imaginary_from, r.imaginary_to, r.imaginary_down);
      if (!(real == imag)) out.sync_identical_every_step = false;
    }
    dis_s.push_back(disagreement(rs.imaginary, rs.real));
    dis_n.push_back(disagreement(rn.imaginary, rn.real));
    l2_s.push_back(l2_distance(rs.real, intended));
    l2_n.push_back(l2_distance(rn.real, intended));
    if (l2_s.back() < l2_n.back()) ++out.sync_closer;
  }
  out.disagreement_sync = summarize(dis_s);
  out.disagreement_nosync = summarize(dis_n);
  out.intended_l2_sync = summarize(l2_s);
  out.intended_l2_nosync = summarize(l2_n);
  return out;
}

namespace {

json stats_json(const Stats& s) { return {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}}; }

}  // namespace

json make_report(const CommanderEval* commander, const StrokerEval* stroker, const SyncAblation* sync) {
  json r = {{"schema_version", kReportSchemaVersion}, {"commander", nullptr}, {"stroker", nullptr}, {"sync", nullptr}};
  if (commander) r["commander"] = {{"l2_distance", stats_json(commander->l2)}};
  if (stroker) {
    r["stroker"] = {{"position_error_cm", stats_json(stroker->position_cm)},
                    {"angle_error_rad", stats_json(stroker->angle_rad)},
                    {"roll_error_rad", stats_json(stroker->roll_rad)},
                    {"pitch_error_rad", stats_json(stroker->pitch_rad)}};
  }
  if (sync) {
    r["sync"] = {{"runs", sync->runs},
                 {"disagreement_sync", stats_json(sync->disagreement_sync)},
                 {"disagreement_nosync", stats_json(sync->disagreement_nosync)},
                 {"intended_l2_sync", stats_json(sync->intended_l2_sync)},
                 {"intended_l2_nosync", stats_json(sync->intended_l2_nosync)},
                 {"sync_closer", sync->sync_closer},
                 {"sync_identical_every_step", sync->sync_identical_every_step}};
  }
  return r;
}

}  // namespace sketchrl
