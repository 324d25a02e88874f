#pragma once

#include <functional>
#include <vector>

#include "json.hpp"
#include "sketchrl/checkpoint.hpp"
#include "sketchrl/config.hpp"
#include "sketchrl/dataset.hpp"

namespace sketchrl {

struct TrainHooks {
  std::function<void(const nlohmann::json& record)> on_metric;
  /// Periodic checkpoints (checkpoint_interval > 0), not the final one.
  std::function<void(long long step, const Checkpoint& ckpt)> on_checkpoint;
};

struct TrainResult {
  std::vector<nlohmann::json> metrics;  // one record per eval_interval steps
  Checkpoint checkpoint;                // state after the last step
};

/// SAC on the imaginary-canvas environment. Episodes draw a uniformly chosen
/// training target; evaluation rolls the deterministic policy out on every
/// evaluation target.
TrainResult train_commander(const RunConfig& cfg, const TargetDataset& train, const TargetDataset& eval,
                            const TrainHooks& hooks = {});

/// SAC on single-step joint-space episodes with the pose schedule.
TrainResult train_stroker(const RunConfig& cfg, const KinematicChain& chain, const TrainHooks& hooks = {});

/// Actor network of a commander checkpoint, checked against the config's
/// observation layout. Mismatches throw std::runtime_error quoting the header.
DenseNetwork commander_actor(const Checkpoint& ckpt, const RunConfig& cfg);
DenseNetwork stroker_actor(const Checkpoint& ckpt);

/// Training and evaluation targets as configured.
TargetDataset commander_train_set(const RunConfig& cfg, const std::filesystem::path& base_dir = {});
TargetDataset commander_eval_set(const RunConfig& cfg);

}  // namespace sketchrl
