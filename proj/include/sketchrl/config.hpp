#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "sketchrl/commander_env.hpp"
#include "sketchrl/deployment.hpp"
#include "sketchrl/kinematics.hpp"
#include "sketchrl/sac.hpp"
#include "sketchrl/similarity.hpp"
#include "sketchrl/stroker_env.hpp"

namespace sketchrl {

enum class SimilarityKind { L2, Adversarial };

std::string similarity_name(SimilarityKind k);
SimilarityKind similarity_from_name(const std::string& name);

struct CommanderRunConfig {
  CommanderEpisodeConfig episode;
  CommanderObservationConfig observation;
  SimilarityKind similarity = SimilarityKind::L2;
  DiscriminatorConfig discriminator;
  SacConfig sac;
  int hindsight_goals = 2;  // relabelled copies per step, goals drawn from later canvases (L2 only)
  std::string train_shapes = "all";
  int train_count = 400;
  std::uint64_t train_seed = 1;
  std::string train_dataset;  // dataset file; overrides the generated set when set
  std::string eval_shapes = "all";
  int eval_count = 50;
  std::uint64_t eval_seed = 2;
};

struct StrokerRunConfig {
  std::string chain_file;  // empty: built-in default chain
  StrokerConfig env;       // mapping is taken from the run's canvas section
  SacConfig sac;
  int eval_goals = 500;
  std::uint64_t eval_seed = 3;
};

struct RunConfig {
  CanvasMapping canvas;
  CommanderRunConfig commander;
  StrokerRunConfig stroker;
  DeploymentConfig deployment;

  /// Range and consistency checks; resolves nothing.
  void validate() const;
};

/// Built-in defaults with training budgets sized for one CPU core.
RunConfig default_run_config();

/// Overlays `j` onto `base`. Unknown keys and out-of-range values throw
/// std::invalid_argument naming the key path.
RunConfig parse_run_config(const nlohmann::json& j, RunConfig base = default_run_config());
/// JSON text; // and /* */ comments are allowed.
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Complete resolved configuration; parse_run_config(run_config_to_json(c)) == c.
nlohmann::json run_config_to_json(const RunConfig& c);

nlohmann::json sac_config_to_json(const SacConfig& c);
SacConfig parse_sac_config(const nlohmann::json& j, SacConfig base = {});

/// Chain for the stroker section, relative paths resolved against `base_dir`.
KinematicChain resolve_chain(const RunConfig& c, const std::filesystem::path& base_dir = {});

/// Path from SKETCHRL_CONFIG when set, empty otherwise.
std::filesystem::path default_config_path();

}  // namespace sketchrl
