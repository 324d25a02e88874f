// Command-line entry points: data generation and import, training, sketching
// and evaluation.
#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sketchrl/canvas_io.hpp"
#include "sketchrl/config.hpp"
#include "sketchrl/dataset.hpp"
#include "sketchrl/deployment.hpp"
#include "sketchrl/evaluation.hpp"
#include "sketchrl/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sketchrl;

namespace {

struct Loaded {
  RunConfig cfg;
  fs::path base_dir;  // relative paths in the config resolve against this
};

Loaded load_config(const std::string& path) {
  fs::path p = path.empty() ? default_config_path() : fs::path(path);
  if (p.empty()) return {default_run_config(), fs::current_path()};
  Loaded l{load_run_config(p), fs::absolute(p).parent_path()};
  return l;
}

// Absolute paths so the logged config reruns from any directory.
RunConfig resolved(const Loaded& l) {
  RunConfig c = l.cfg;
  auto abs = [&](std::string& s) {
    if (!s.empty() && fs::path(s).is_relative()) s = (l.base_dir / s).lexically_normal().string();
  };
  abs(c.stroker.chain_file);
  abs(c.commander.train_dataset);
  return c;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

void log_config(const RunConfig& c, const fs::path& dir) {
  write_text(dir / "config.json", run_config_to_json(c).dump(2) + "\n");
  std::cerr << "resolved config written to " << (dir / "config.json").string() << "\n";
}

Canvas load_target(const std::string& path, int index, int side) {
  const fs::path p(path);
  const auto ext = p.extension().string();
  Canvas c = [&] {
    if (ext == ".png") return read_png(p);
    if (ext == ".pbm") return read_pbm(p);
    auto d = load_dataset(p);
    if (index < 0 || static_cast<std::size_t>(index) >= d.size()) {
      throw std::out_of_range("target index " + std::to_string(index) + " outside dataset of " + std::to_string(d.size()));
    }
    return d.targets[index];
  }();
  if (c.width() != side || c.height() != side) {
    throw std::invalid_argument("target " + path + " is " + std::to_string(c.width()) + "x" + std::to_string(c.height()) +
                                ", canvas is " + std::to_string(side) + "x" + std::to_string(side));
  }
  return c;
}

Checkpoint load_checkpoint(const std::string& path, const char* what) {
  if (path.empty()) throw std::invalid_argument(std::string("missing ") + what + " checkpoint");
  if (!fs::exists(path)) throw std::runtime_error(std::string(what) + " checkpoint not found: " + path);
  return Checkpoint::load(path);
}

void train(const Loaded& l, const fs::path& out, std::optional<long long> steps, bool commander) {
  RunConfig cfg = resolved(l);
  SacConfig& sac = commander ? cfg.commander.sac : cfg.stroker.sac;
  if (steps) sac.total_steps = *steps;
  cfg.validate();
  fs::create_directories(out);
  log_config(cfg, out);
  std::ofstream metrics(out / "metrics.jsonl", std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot write " + (out / "metrics.jsonl").string());
  TrainHooks hooks;
  hooks.on_metric = [&](const json& r) {
    metrics << r.dump() << '\n';
    metrics.flush();
    std::cerr << r.dump() << '\n';
  };
  hooks.on_checkpoint = [&](long long step, const Checkpoint& c) {
    c.save(out / ("checkpoint_" + std::to_string(step) + ".bin"));
  };
  TrainResult r = commander ? train_commander(cfg, commander_train_set(cfg), commander_eval_set(cfg), hooks)
                            : train_stroker(cfg, resolve_chain(cfg), hooks);
  r.checkpoint.save(out / "checkpoint.bin");
  std::cerr << "checkpoint written to " << (out / "checkpoint.bin").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical RL sketching agent"};
  app.require_subcommand(1);
  std::string config_path;
  bool single_thread = false;
  app.add_option("-c,--config", config_path, "run configuration (default: $SKETCHRL_CONFIG, else built-in)");
  app.add_flag("--single-thread", single_thread, "force deterministic single-threaded execution");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate synthetic target images");
  std::string shapes = "all", gen_out;
  int count = 0, size = 0;
  std::uint64_t seed = 0;
  gen->add_option("--shapes", shapes, "comma-separated shape classes or 'all'");
  gen->add_option("--count", count, "number of targets")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--size", size, "canvas side in pixels (default: config)");
  gen->add_option("-o,--out", gen_out, "dataset file")->required();

  // import-strokes
  auto* imp = app.add_subcommand("import-strokes", "rasterize Quick, Draw! simplified drawings");
  std::string imp_in, imp_out;
  int source_box = 256;
  imp->add_option("input", imp_in, "NDJSON drawings")->required();
  imp->add_option("-o,--out", imp_out, "dataset file")->required();
  imp->add_option("--size", size, "canvas side in pixels (default: config)");
  imp->add_option("--source-box", source_box, "coordinate range of the input");

  // training
  std::string train_out;
  std::optional<long long> steps;
  auto* tc = app.add_subcommand("train-commander", "train the stroke-planning policy");
  auto* ts = app.add_subcommand("train-stroker", "train the joint-space policy");
  for (auto* sub : {tc, ts}) {
    sub->add_option("-o,--out", train_out, "output directory")->required();
    sub->add_option("--steps", steps, "override total environment steps");
  }

  // sketch
  auto* sk = app.add_subcommand("sketch", "draw one target with both policies");
  std::string commander_ckpt, stroker_ckpt, target_path, sketch_out;
  int target_index = 0;
  bool no_sync = false, perfect = false;
  std::optional<double> sigma;
  std::optional<std::uint64_t> noise_seed;
  sk->add_option("--commander", commander_ckpt, "commander checkpoint")->required();
  sk->add_option("--stroker", stroker_ckpt, "stroker checkpoint");
  sk->add_flag("--perfect-stroker", perfect, "replace the stroker with exact execution");
  sk->add_option("-t,--target", target_path, "target PNG, PBM or dataset file")->required();
  sk->add_option("--index", target_index, "target index within a dataset file");
  sk->add_flag("--no-sync", no_sync, "do not synchronize the imaginary canvas");
  sk->add_option("--noise-sigma", sigma, "planar execution noise in cm");
  sk->add_option("--noise-seed", noise_seed, "execution noise seed");
  sk->add_option("-o,--out", sketch_out, "output directory")->required();

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate checkpoints on a dataset");
  std::string dataset_path, report_path;
  int sync_runs = 20;
  ev->add_option("--commander", commander_ckpt, "commander checkpoint")->required();
  ev->add_option("--stroker", stroker_ckpt, "stroker checkpoint");
  ev->add_flag("--perfect-stroker", perfect, "evaluate with exact execution");
  ev->add_option("-d,--dataset", dataset_path, "target dataset file")->required();
  ev->add_option("--sync-runs", sync_runs, "paired sync/no-sync sketches");
  ev->add_option("--noise-sigma", sigma, "planar execution noise in cm");
  ev->add_option("-o,--out", report_path, "report file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  // Every code path is sequential; the flag pins Eigen as well.
  Eigen::setNbThreads(1);
  (void)single_thread;

  try {
    const Loaded loaded = load_config(config_path);
    const RunConfig& cfg = loaded.cfg;
    const int side = size > 0 ? size : cfg.canvas.pixels_per_side;

    if (*gen) {
      const auto d = generate_dataset(shapes, count, seed, side, side);
      save_dataset(d, fs::path(gen_out));
      std::cerr << "wrote " << d.size() << " targets to " << gen_out << "\n";
    } else if (*imp) {
      const auto d = import_strokes(fs::path(imp_in), side, side, source_box);
      save_dataset(d, fs::path(imp_out));
      std::cerr << "wrote " << d.size() << " targets to " << imp_out << "\n";
    } else if (*tc || *ts) {
      train(loaded, train_out, steps, tc->parsed());
    } else if (*sk || *ev) {
      RunConfig c = resolved(loaded);
      if (sigma) c.deployment.noise.position_sigma_cm = *sigma;
      if (noise_seed) c.deployment.noise.seed = *noise_seed;
      if (no_sync) c.deployment.sync = false;
      c.validate();
      if (!perfect && stroker_ckpt.empty()) throw std::invalid_argument("--stroker or --perfect-stroker is required");
      const KinematicChain chain = resolve_chain(c);
      SacCommanderPolicy commander(commander_actor(load_checkpoint(commander_ckpt, "commander"), c), c.commander.episode,
                                   c.commander.observation);
      const ExecutorFactory factory = perfect ? perfect_executor_factory(chain, c.stroker.env)
                                              : policy_executor_factory(stroker_actor(load_checkpoint(stroker_ckpt, "stroker")),
                                                                        chain, c.stroker.env);
      if (*sk) {
        const Canvas target = load_target(target_path, target_index, c.canvas.pixels_per_side);
        const JointVector start = deployment_start_pose(
            chain, c.stroker.env, c.commander.episode.start_for(c.canvas.pixels_per_side, c.canvas.pixels_per_side));
        auto exec = factory(start);
        const auto r = sketch(target, commander, *exec, c.canvas, c.commander.episode, c.stroker.env, c.deployment);
        const fs::path out(sketch_out);
        fs::create_directories(out);
        log_config(c, out);
        write_png(r.real, out / "real.png");
        write_png(r.imaginary, out / "imaginary.png");
        write_text(out / "sketch.svg", sketch_to_svg(r.trace, c.canvas));
        std::ofstream trace(out / "trace.jsonl", std::ios::binary);
        write_sketch_trace(r.trace, trace);
        std::cout << json{{"l2_distance", l2_distance(r.real, target)},
                          {"imaginary_equals_real", r.real == r.imaginary},
                          {"strokes", r.trace.records.size()}}
                         .dump()
                  << "\n";
      } else {
        const auto data = load_dataset(fs::path(dataset_path));
        if (data.size() == 0) throw std::invalid_argument("dataset " + dataset_path + " is empty");
        if (data.width != c.canvas.pixels_per_side || data.height != c.canvas.pixels_per_side) {
          throw std::invalid_argument("dataset dimensions differ from the canvas");
        }
        const auto ce = evaluate_commander(commander, data.targets, c.commander.episode);
        const auto se = evaluate_stroker(factory, chain, c.stroker.env, c.stroker.eval_goals, c.stroker.eval_seed);
        const auto sa = sync_ablation(data.targets, commander, factory, chain, c.canvas, c.commander.episode,
                                      c.stroker.env, c.deployment, sync_runs);
        const std::string text = make_report(&ce, &se, &sa).dump(2) + "\n";
        if (report_path.empty()) {
          std::cout << text;
        } else {
          write_text(report_path, text);
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
