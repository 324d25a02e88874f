#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "json.hpp"
#include "sketchrl/deployment.hpp"

namespace sketchrl {

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t count = 0;
};

Stats summarize(std::span<const double> values);

struct CommanderEval {
  Stats l2;  // final-canvas L2 distance to the target
  std::vector<double> per_target;
};

/// Noise-free imaginary rollouts; throws on an empty target list.
CommanderEval evaluate_commander(CommanderPolicy& commander, const std::vector<Canvas>& targets,
                                 const CommanderEpisodeConfig& episode);

using ExecutorFactory = std::function<std::unique_ptr<StrokeExecutor>(const JointVector& start)>;

struct StrokerEval {
  Stats position_cm;  // 3-D distance between reached and goal displacement
  Stats angle_rad;    // sqrt(droll^2 + dpitch^2) against the preferred tilt
  Stats roll_rad;     // |droll|
  Stats pitch_rad;    // |dpitch|
};

/// One goal per episode from a uniformly chosen schedule pose; goals and
/// start poses are drawn from `seed` only.
StrokerEval evaluate_stroker(const ExecutorFactory& make_executor, const KinematicChain& chain,
                             const StrokerConfig& cfg, int goals, std::uint64_t seed);

ExecutorFactory policy_executor_factory(const DenseNetwork& actor, const KinematicChain& chain,
                                        const StrokerConfig& cfg);
ExecutorFactory perfect_executor_factory(const KinematicChain& chain, const StrokerConfig& cfg);

/// Schedule pose whose pentip pixel is closest to `pixel` (first on ties).
JointVector deployment_start_pose(const KinematicChain& chain, const StrokerConfig& cfg, PixelCoord pixel);

struct SyncAblation {
  int runs = 0;
  Stats disagreement_sync;    // fraction of differing pixels, imaginary vs real
  Stats disagreement_nosync;
  Stats intended_l2_sync;     // real canvas vs the noise-free Commander rollout
  Stats intended_l2_nosync;
  int sync_closer = 0;        // runs where sync is strictly closer to the rollout
  bool sync_identical_every_step = true;
};

/// Paired runs: run i uses noise seed cfg.noise.seed + i for both modes and
/// targets[i % targets.size()].
SyncAblation sync_ablation(const std::vector<Canvas>& targets, CommanderPolicy& commander,
                           const ExecutorFactory& make_executor, const KinematicChain& chain,
                           const CanvasMapping& mapping, const CommanderEpisodeConfig& episode,
                           const StrokerConfig& stroker, const DeploymentConfig& cfg, int runs);

inline constexpr int kReportSchemaVersion = 1;

/// Fixed-schema report; sections that were not evaluated are null.
nlohmann::json make_report(const CommanderEval* commander, const StrokerEval* stroker, const SyncAblation* sync);

}  // namespace sketchrl
