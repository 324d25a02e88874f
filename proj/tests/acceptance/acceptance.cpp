#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "sketchrl/commander_env.hpp"
#include "sketchrl/config.hpp"
#include "sketchrl/dataset.hpp"
#include "sketchrl/deployment.hpp"
#include "sketchrl/evaluation.hpp"
#include "sketchrl/geometry.hpp"
#include "sketchrl/network.hpp"
#include "sketchrl/sac.hpp"
#include "sketchrl/similarity.hpp"
#include "sketchrl/stroker_env.hpp"
#include "sketchrl/training.hpp"

namespace fs = std::filesystem;
using namespace sketchrl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome rasterization() {
  const auto t0 = std::chrono::steady_clock::now();
  long long mismatches = 0, cases = 0;
  const int n = 12;
  for (int a = 0; a < n * n; ++a) {
    for (int b = 0; b < n * n; ++b) {
      const PixelCoord p{a % n, a / n}, q{b % n, b / n};
      if (rasterized(Canvas(n, n), p, q, true) != oracle::raster(n, n, p, q)) ++mismatches;
      ++cases;
    }
  }
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> u(0, 41);
  for (int i = 0; i < 1000; ++i) {
    const PixelCoord p{u(rng), u(rng)}, q{u(rng), u(rng)};
    if (rasterized(Canvas(42, 42), p, q, true) != oracle::raster(42, 42, p, q)) ++mismatches;
    ++cases;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(cases) + " segments, " + std::to_string(mismatches) + " mismatches, " +
              fmt("%.2f s", secs)};
}

Outcome mapping_fidelity() {
  const CanvasMapping m;
  bool ok = physical_to_pixel({0.5, 0.5, 0.0}, m) == PixelCoord{1, 1} &&
            physical_to_pixel({0.3, 0.3, 0.0}, m) == PixelCoord{1, 1};
  int failures = 0;
  for (int y = 0; y < m.pixels_per_side; ++y) {
    for (int x = 0; x < m.pixels_per_side; ++x) {
      if (physical_to_pixel(pixel_to_physical({x, y}, m), m) != PixelCoord{x, y}) ++failures;
    }
  }
  ok = ok && failures == 0;
  return {ok, "0.5 cm and 0.3 cm -> 1 px; " + std::to_string(failures) + " round-trip failures over 42x42"};
}

Outcome reward_points() {
  const double pr = 0.1, pp = 0.1;
  const Eigen::Vector3d g(1.5, -2.0, 0.0);
  const double matched = stroker_reward(g, g, pr, pp, pr, pp);
  const double lifted = stroker_reward(g, Eigen::Vector3d(1.5, -2.0, 1.0), pr, pp, pr, pp);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> which(0, 4);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::Vector3d goal(2.5 * u(rng), 2.5 * u(rng), i % 2 ? 0.0 : 1.0);
    if (goal.head<2>().norm() < 1e-3) goal.x() = 1.0;
    Eigen::Vector3d p = goal;
    double roll = pr, pitch = pp;
    const double eps = std::pow(10.0, -6.0 + 3.0 * (u(rng) + 1.0));
    switch (which(rng)) {
      case 0: p.x() += eps; break;
      case 1: p.y() -= eps; break;
      case 2: p.z() += eps; break;
      case 3: roll += eps; break;
      default: pitch -= eps; break;
    }
    if (!(stroker_reward(goal, p, roll, pitch, pr, pp) < 5.0)) ++violations;
  }
  const bool ok = std::abs(matched - 5.0) <= 1e-9 && std::abs(lifted - (5.0 - 10.0 * std::sqrt(5.0))) <= 1e-9 &&
                  violations == 0;
  return {ok, fmt("matched %.12f", matched) + fmt(", z+1 cm %.12f", lifted) + ", " + std::to_string(violations) +
                  " of 10000 perturbations >= 5"};
}

Outcome telescoping() {
  const auto targets = generate_dataset("all", 100, 77, 42, 42);
  const CommanderEnv env(42, 42);
  const L2Similarity l2;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t e = 0; e < targets.size(); ++e) {
    const Canvas& target = targets.targets[e];
    CommanderState s = env.reset(target);
    const double d0 = l2.score(s.canvas, target);
    double sum = 0.0;
    for (bool done = false; !done;) {
      auto st = env.step(s, StrokeCommand::clamped(u(rng), u(rng), u(rng)), target, l2);
      sum += st.reward;
      done = st.done;
      s = std::move(st.next);
    }
    worst = std::max(worst, std::abs(sum - (l2.score(s.canvas, target) - d0)));
  }
  return {worst <= 1e-12, "100 episodes, max |sum r - (d_T - d_0)| = " + fmt("%.3g", worst)};
}

struct GradCheck {
  double worst = 0.0;
  void add(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    worst = std::max(worst, oracle::max_relative_error(analytic, numeric));
  }
};

std::vector<double> flat(const Eigen::MatrixXd& m) { return {m.data(), m.data() + m.size()}; }

Eigen::MatrixXd unflat(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Batch random_batch(int sd, int gd, int ad, int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  std::vector<Transition> ts;
  for (int i = 0; i < n; ++i) {
    Transition t;
    for (int k = 0; k < sd; ++k) t.state.push_back(g(rng)), t.next_state.push_back(g(rng));
    for (int k = 0; k < gd; ++k) t.goal.push_back(g(rng));
    for (int k = 0; k < ad; ++k) t.action.push_back(u(rng));
    t.reward = g(rng);
    t.done = i % 3 == 0;
    ts.push_back(std::move(t));
  }
  return make_batch(ts);
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(31337);
  std::normal_distribution<double> g(0.0, 0.3);
  const Activation acts[3] = {Activation::Tanh, Activation::Relu, Activation::Identity};
  GradCheck dense, head, disc, critic, actor, temp;
  for (int trial = 0; trial < 20; ++trial) {
    // Dense network: parameters and input.
    std::vector<int> sizes{2 + trial % 3, 3 + trial % 4, 2 + trial % 2, 1 + trial % 3};
    DenseNetwork net(sizes, acts[trial % 3], acts[(trial + 1) % 3], rng);
    for (auto& l : net.layers()) {
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = g(rng);
    }
    const Eigen::MatrixXd x = standard_normal(sizes.front(), 3, rng);
    const Eigen::MatrixXd up = standard_normal(sizes.back(), 3, rng);
    DenseNetwork::Tape tape;
    net.forward(x, tape);
    Eigen::MatrixXd dx;
    const auto grad = net.backward(tape, up, &dx).flatten();
    dense.add(grad, oracle::finite_difference(
                        [&](const std::vector<double>& p) {
                          DenseNetwork c = net;
                          c.set_parameters(p);
                          return (c.forward(x).array() * up.array()).sum();
                        },
                        net.parameters()));
    dense.add(flat(dx), oracle::finite_difference(
                            [&](const std::vector<double>& v) {
                              return (net.forward(unflat(v, x.rows(), x.cols())).array() * up.array()).sum();
                            },
                            flat(x)));

    // Squashed Gaussian policy head.
    const int a = 1 + trial % 3, b = 2 + trial % 2;
    Eigen::MatrixXd h = standard_normal(2 * a, b, rng);
    h.bottomRows(a) *= 0.5;
    const Eigen::MatrixXd noise = standard_normal(a, b, rng), da = standard_normal(a, b, rng);
    const Eigen::VectorXd dlp = standard_normal(b, 1, rng);
    const Eigen::MatrixXd gh = squashed_gaussian_backward(squashed_gaussian(h, noise), da, dlp);
    head.add(flat(gh), oracle::finite_difference(
                           [&](const std::vector<double>& v) {
                             const auto s = squashed_gaussian(unflat(v, h.rows(), h.cols()), noise);
                             return (s.action.array() * da.array()).sum() + s.log_prob.dot(dlp);
                           },
                           flat(h)));

    // Spectrally normalized discriminator, hinge loss.
    DiscriminatorConfig dc;
    dc.hidden = {6, 5};
    dc.zero_init_output = false;
    Discriminator d(3, 3, dc, rng);
    oracle::randomize_biases(d, rng);
    std::vector<Canvas> cs, ts;
    std::uniform_int_distribution<int> px(0, 2);
    for (int i = 0; i < 4; ++i) {
      Canvas t(3, 3), c(3, 3);
      rasterize_segment(t, {px(rng), px(rng)}, {px(rng), px(rng)}, true);
      rasterize_segment(c, {px(rng), px(rng)}, {px(rng), px(rng)}, true);
      ts.push_back(t);
      cs.push_back(c);
    }
    std::vector<Discriminator::CanvasPair> real, fake;
    for (int i = 0; i < 4; ++i) real.push_back({&ts[i], &ts[i]}), fake.push_back({&cs[i], &ts[i]});
    NetworkGradient dg;
    d.hinge_loss(real, fake, &dg);
    disc.add(dg.flatten(), oracle::finite_difference(
                               [&](const std::vector<double>& p) {
                                 Discriminator c = d;
                                 c.set_raw_parameters(p);
                                 return c.hinge_loss(real, fake);
                               },
                               d.raw_network().parameters()));

    // SAC losses.
    SacConfig sc;
    sc.hidden = {5 + trial % 3};
    sc.batch_size = 4;
    sc.buffer_capacity = 16;
    sc.initial_alpha = 0.2 + 0.1 * (trial % 4);
    // Odd instances read the critic's extra input from a 3x3 grid in the state.
    const bool grid = trial % 2 == 1;
    const int sd = grid ? 10 : 2, ad = grid ? 3 : 2;
    SacAgent agent(sd + 1, ad, sc, rng,
                   grid ? std::optional<ActionGridLookup>(ActionGridLookup{1, 3, 1, 2}) : std::nullopt);
    const Batch batch = random_batch(sd, 1, ad, 5, rng);
    const Eigen::VectorXd y = standard_normal(5, 1, rng);
    NetworkGradient g1, g2;
    agent.critic_loss(batch, y, &g1, &g2);
    critic.add(g1.flatten(), oracle::finite_difference(
                                 [&](const std::vector<double>& p) {
                                   SacAgent c = agent;
                                   c.q1.set_parameters(p);
                                   return c.critic_loss(batch, y, nullptr, nullptr);
                                 },
                                 agent.q1.parameters()));
    critic.add(g2.flatten(), oracle::finite_difference(
                                 [&](const std::vector<double>& p) {
                                   SacAgent c = agent;
                                   c.q2.set_parameters(p);
                                   return c.critic_loss(batch, y, nullptr, nullptr);
                                 },
                                 agent.q2.parameters()));
    const Eigen::MatrixXd an = standard_normal(ad, 5, rng);
    NetworkGradient ag;
    Eigen::VectorXd lp;
    agent.actor_loss(batch, an, &ag, &lp);
    actor.add(ag.flatten(), oracle::finite_difference(
                                [&](const std::vector<double>& p) {
                                  SacAgent c = agent;
                                  c.actor.set_parameters(p);
                                  return c.actor_loss(batch, an, nullptr);
                                },
                                agent.actor.parameters()));
    double tg = 0.0;
    agent.temperature_loss(lp, &tg);
    temp.add({tg}, oracle::finite_difference(
                       [&](const std::vector<double>& v) {
                         SacAgent c = agent;
                         c.set_log_alpha(v[0]);
                         return c.temperature_loss(lp, nullptr);
                       },
                       {agent.log_alpha()}));
  }
  const double secs = seconds_since(t0);
  const double worst = std::max({dense.worst, head.worst, disc.worst, critic.worst, actor.worst, temp.worst});
  return {worst < 1e-4 && secs < 60.0,
          "20 instances each; max rel err dense " + fmt("%.1e", dense.worst) + fmt(", head %.1e", head.worst) +
              fmt(", discriminator %.1e", disc.worst) + fmt(", critic %.1e", critic.worst) +
              fmt(", actor %.1e", actor.worst) + fmt(", temperature %.1e", temp.worst) + fmt("; %.1f s", secs)};
}

struct Trained {
  RunConfig cfg;
  KinematicChain chain;
  std::optional<Checkpoint> stroker, commander;
};

TrainHooks progress(const std::string& tag) {
  TrainHooks h;
  h.on_metric = [tag](const nlohmann::json& m) {
    std::cerr << "  [" << tag << "] " << m.dump() << "\n";
  };
  return h;
}

Outcome stroker_learning(Trained& tr, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig& cfg = tr.cfg;
  RunConfig zero = cfg;
  zero.stroker.sac.total_steps = 0;
  const Checkpoint untrained = train_stroker(zero, tr.chain).checkpoint;
  const TrainResult res = train_stroker(cfg, tr.chain, progress("stroker"));
  res.checkpoint.save(work / "stroker.bin");
  tr.stroker = res.checkpoint;
  const double train_secs = seconds_since(t0);
  const auto& env = cfg.stroker.env;
  const StrokerEval before = evaluate_stroker(policy_executor_factory(stroker_actor(untrained), tr.chain, env),
                                              tr.chain, env, 500, cfg.stroker.eval_seed);
  const StrokerEval after = evaluate_stroker(policy_executor_factory(stroker_actor(res.checkpoint), tr.chain, env),
                                             tr.chain, env, 500, cfg.stroker.eval_seed);
  const double ratio = before.position_cm.mean / after.position_cm.mean;
  const bool ok = cfg.stroker.sac.total_steps <= 300000 && after.position_cm.mean < 0.5 && ratio >= 5.0;
  return {ok, std::to_string(cfg.stroker.sac.total_steps) + " steps; 500 goals: untrained " +
                  fmt("%.3f cm", before.position_cm.mean) + fmt(", trained %.3f cm", after.position_cm.mean) +
                  fmt(" (%.1fx lower)", ratio) + fmt(", angle %.3f rad", after.angle_rad.mean) +
                  fmt("; %.0f s", train_secs)};
}

Outcome commander_learning(Trained& tr, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig& cfg = tr.cfg;
  const TargetDataset train = commander_train_set(cfg);
  const TargetDataset eval = commander_eval_set(cfg);
  std::set<std::string> classes(train.labels.begin(), train.labels.end());
  RunConfig zero = cfg;
  zero.commander.sac.total_steps = 0;
  const Checkpoint untrained = train_commander(zero, train, eval).checkpoint;
  const TrainResult res = train_commander(cfg, train, eval, progress("commander"));
  res.checkpoint.save(work / "commander.bin");
  tr.commander = res.checkpoint;
  const double train_secs = seconds_since(t0);
  const auto& c = cfg.commander;
  SacCommanderPolicy p0(commander_actor(untrained, cfg), c.episode, c.observation);
  SacCommanderPolicy p1(commander_actor(res.checkpoint, cfg), c.episode, c.observation);
  const double before = evaluate_commander(p0, eval.targets, c.episode).l2.mean;
  const double after = evaluate_commander(p1, eval.targets, c.episode).l2.mean;
  const double reduction = 1.0 - after / before;
  const bool ok = c.similarity == SimilarityKind::L2 && classes.size() == 8 && c.sac.total_steps <= 200000 &&
                  eval.size() == 50 && reduction >= 0.40;
  return {ok, std::to_string(c.sac.total_steps) + " steps, " + std::to_string(classes.size()) +
                  " classes; 50 held-out targets: untrained L2 " + fmt("%.4f", before) +
                  fmt(", trained %.4f", after) + fmt(" (%.1f%% lower)", 100.0 * reduction) +
                  fmt("; %.0f s", train_secs)};
}

Outcome discriminator_sanity() {
  const RunConfig cfg = default_run_config();
  Rng rng(8);
  Discriminator d(42, 42, cfg.commander.discriminator, rng);
  const auto targets = generate_dataset("all", 32, 12, 42, 42).targets;
  std::vector<Canvas> fakes;
  std::mt19937_64 prng(13);
  std::uniform_int_distribution<int> u(0, 41);
  for (int i = 0; i < 32; ++i) {
    Canvas c(42, 42);
    for (int k = 0; k < 3; ++k) rasterize_segment(c, {u(prng), u(prng)}, {u(prng), u(prng)}, true);
    fakes.push_back(c);
  }
  std::vector<Discriminator::CanvasPair> real, fake;
  for (int i = 0; i < 32; ++i) real.push_back({&targets[i], &targets[i]}), fake.push_back({&fakes[i], &targets[i]});
  double worst_norm = 0.0;
  auto check_norms = [&] {
    for (const auto& l : d.normalized_network().layers()) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(l.weight);
      worst_norm = std::max(worst_norm, svd.singularValues()(0));
    }
  };
  check_norms();
  double prev = d.hinge_loss(real, fake);
  const double first = prev;
  int non_increasing = 0;
  for (int i = 0; i < 50; ++i) {
    d.update(real, fake);
    const double now = d.hinge_loss(real, fake);
    if (now <= prev) ++non_increasing;
    prev = now;
    check_norms();
  }
  const bool ok = non_increasing >= 45 && worst_norm <= 1.0 + 1e-3;
  return {ok, std::to_string(non_increasing) + "/50 non-increasing steps, loss " + fmt("%.4f", first) +
                  fmt(" -> %.4f", prev) + fmt(", max spectral norm %.6f", worst_norm)};
}

Outcome sync_ablation_check(const Trained& tr) {
  if (!tr.stroker || !tr.commander) return {false, "needs trained policies (criteria 6 and 7 did not run)"};
  const RunConfig& cfg = tr.cfg;
  const auto& c = cfg.commander;
  SacCommanderPolicy commander(commander_actor(*tr.commander, cfg), c.episode, c.observation);
  DeploymentConfig dep = cfg.deployment;
  dep.noise.position_sigma_cm = 0.5;
  const auto eval = commander_eval_set(cfg);
  const auto ab = sync_ablation(eval.targets, commander,
                                policy_executor_factory(stroker_actor(*tr.stroker), tr.chain, cfg.stroker.env),
                                tr.chain, cfg.canvas, c.episode, cfg.stroker.env, dep, 20);
  const bool ok = ab.runs == 20 && ab.sync_identical_every_step && ab.sync_closer >= 18;
  return {ok, std::string("sigma 0.5 cm, 20 paired sketches: imaginary == real every step ") +
                  (ab.sync_identical_every_step ? "yes" : "no") + "; sync closer to intent in " +
                  std::to_string(ab.sync_closer) + "/20 (mean L2 " + fmt("%.4f", ab.intended_l2_sync.mean) +
                  fmt(" vs %.4f", ab.intended_l2_nosync.mean) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "<missing>";
  return {std::istreambuf_iterator<char>(in), {}};
}

int run(const std::string& cmd, const fs::path& log) {
  const std::string full = cmd + " >> \"" + log.string() + "\" 2>&1";
  return std::system(full.c_str());
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "command-line tool not found: " + cli};
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "run.json") << R"({
  "commander": {"sac": {"total_steps": 3000, "start_steps": 500, "update_after": 500, "eval_interval": 1000,
                        "checkpoint_interval": 1500},
                "data": {"train_count": 40, "eval_count": 5}},
  "stroker": {"sac": {"total_steps": 3000, "start_steps": 500, "update_after": 500, "eval_interval": 1000,
                      "checkpoint_interval": 1500},
              "eval": {"goals": 50}}
})";
  }
  const fs::path log = root / "log.txt";
  const std::string base = "\"" + cli + "\" --single-thread -c \"" + (root / "run.json").string() + "\" ";
  int failures = 0;
  for (const char* rep : {"a", "b"}) {
    const fs::path d = root / rep;
    failures += run(base + "train-stroker -o \"" + (d / "stroker").string() + "\"", log) != 0;
    failures += run(base + "train-commander -o \"" + (d / "commander").string() + "\"", log) != 0;
    failures += run(base + "gen-data --count 3 --seed 5 -o \"" + (d / "targets.jsonl").string() + "\"", log) != 0;
    failures += run(base + "sketch --commander \"" + (d / "commander" / "checkpoint.bin").string() +
                        "\" --stroker \"" + (d / "stroker" / "checkpoint.bin").string() + "\" -t \"" +
                        (d / "targets.jsonl").string() + "\" --index 2 --noise-sigma 0.5 -o \"" +
                        (d / "sketch").string() + "\"",
                    log) != 0;
  }
  if (failures) return {false, std::to_string(failures) + " commands failed, see " + log.string()};
  int compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  const bool ok = differing == 0 && compared >= 12;
  return {ok, std::to_string(compared) + " files from two runs (metrics, checkpoints, canvases, traces), " +
                  std::to_string(differing) + " differ" + (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string work_dir = (fs::temp_directory_path() / "sketchrl_acceptance").string();
  std::string cli =
#ifdef SKETCHRL_CLI_PATH
      SKETCHRL_CLI_PATH;
#else
      "";
#endif
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "scratch directory for checkpoints and determinism runs");
  app.add_option("--cli", cli, "path of the sketchrl command-line tool");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work_dir);

  Trained tr;
  tr.cfg = default_run_config();
  tr.chain = resolve_chain(tr.cfg);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Rasterization oracle equivalence", rasterization},
      {"Mapping fidelity", mapping_fidelity},
      {"Stroke reward point tests", reward_points},
      {"Commander reward telescoping", telescoping},
      {"Gradient correctness", gradients},
      {"Stroker desk-scale learning", [&] { return stroker_learning(tr, work_dir); }},
      {"Commander desk-scale learning", [&] { return commander_learning(tr, work_dir); }},
      {"Discriminator sanity", discriminator_sanity},
      {"Synchronization ablation", [&] { return sync_ablation_check(tr); }},
      {"Determinism", [&] { return determinism(cli, work_dir); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
