#include "sketchrl/deployment.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "sketchrl/similarity.hpp"

namespace sketchrl {

using nlohmann::json;

void NoiseModel::validate() const {
  if (!(position_sigma_cm >= 0.0) || !(z_sigma_cm >= 0.0) || !(rotation_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigmas must be >= 0");
  }
}

bool contact_test(const PenPose& pose, double threshold_cm) {
  return std::abs(pose.position.z) <= threshold_cm;
}

SacCommanderPolicy::SacCommanderPolicy(DenseNetwork actor, CommanderEpisodeConfig episode,
                                       CommanderObservationConfig obs)
    : actor_(std::move(actor)), episode_(std::move(episode)), obs_(obs) {
  if (actor_.output_dim() != 6) throw std::invalid_argument("commander actor must output 6 values");
}

StrokeCommand SacCommanderPolicy::act(const CommanderState& state, const Canvas& target) {
  const auto f = commander_features(state, target, episode_, obs_);
  Eigen::VectorXd x(static_cast<Eigen::Index>(f.state.size() + f.goal.size()));
  std::copy(f.state.begin(), f.state.end(), x.data());
  std::copy(f.goal.begin(), f.goal.end(), x.data() + f.state.size());
  if (x.size() != actor_.input_dim()) {
    throw std::invalid_argument("commander observation has " + std::to_string(x.size()) +
                                " features, actor expects " + std::to_string(actor_.input_dim()));
  }
  const Eigen::VectorXd head = actor_.forward(x);
  const double a[3] = {std::tanh(head(0)), std::tanh(head(1)), std::tanh(head(2))};
  return command_from_action(a);
}

PerfectStroker::PerfectStroker(PenPose start, StrokerConfig cfg) : pose_(start), cfg_(std::move(cfg)) {}

ExecutedStroke PerfectStroker::execute(const StrokerGoal& goal) {
  pose_.position.x += goal.displacement.x();
  pose_.position.y += goal.displacement.y();
  pose_.position.z = goal.displacement.z();
  pose_.roll = cfg_.preferred_roll;
  pose_.pitch = cfg_.preferred_pitch;
  return {{}, pose_};
}

PolicyStroker::PolicyStroker(DenseNetwork actor, KinematicChain chain, StrokerConfig cfg, JointVector start)
    : actor_(std::move(actor)), chain_(std::move(chain)), cfg_(std::move(cfg)), joints_(start) {
  if (actor_.input_dim() != kJointCount + 3 || actor_.output_dim() != 2 * kJointCount) {
    throw std::invalid_argument("stroker actor must map 9 inputs to 12 outputs");
  }
  if (!chain_.within_limits(joints_)) throw std::invalid_argument("stroker start pose violates joint limits");
}

PenPose PolicyStroker::current() const { return forward_kinematics(chain_, joints_); }

ExecutedStroke PolicyStroker::execute(const StrokerGoal& goal) {
  const auto sf = stroker_state_features(chain_, joints_);
  const auto gf = stroker_goal_features(goal.command);
  Eigen::VectorXd x(kJointCount + 3);
  for (int i = 0; i < kJointCount; ++i) x(i) = sf[i];
  for (int i = 0; i < 3; ++i) x(kJointCount + i) = gf[i];
  const Eigen::VectorXd head = actor_.forward(x);
  ExecutedStroke out;
  for (int i = 0; i < kJointCount; ++i) {
    out.action[i] = std::tanh(head(i)) * cfg_.max_joint_delta;
    joints_[i] += out.action[i];
  }
  joints_ = chain_.clamp(joints_);
  out.reached = forward_kinematics(chain_, joints_);
  return out;
}

namespace {

// Commander command re-expressed as the pixel displacement it decodes to.
StrokerGoal quantized_goal(const StrokeCommand& cmd, PixelCoord from, PixelCoord to,
                           const CanvasMapping& mapping, const StrokerConfig& stroker) {
  const int dx = to.x - from.x, dy = to.y - from.y;
  StrokerGoal g;
  g.command = StrokeCommand::clamped(cmd.down, 0.5 + static_cast<double>(dx) / stroker.boundary_side,
                                     0.5 + static_cast<double>(dy) / stroker.boundary_side);
  g.displacement = {dx * mapping.cm_per_pixel(), dy * mapping.cm_per_pixel(),
                    cmd.pen_down() ? 0.0 : stroker.hover_height_cm};
  return g;
}

}  // namespace

SketchResult sketch(const Canvas& target, CommanderPolicy& commander, StrokeExecutor& executor,
                    const CanvasMapping& mapping, const CommanderEpisodeConfig& episode,
                    const StrokerConfig& stroker, const DeploymentConfig& cfg) {
  mapping.validate();
  cfg.noise.validate();
  if (target.width() != mapping.pixels_per_side || target.height() != mapping.pixels_per_side) {
    throw std::invalid_argument("target is " + std::to_string(target.width()) + "x" +
                                std::to_string(target.height()) + ", canvas mapping expects " +
                                std::to_string(mapping.pixels_per_side) + " pixels per side");
  }
  if (stroker.boundary_side != episode.boundary_side) {
    throw std::invalid_argument("stroker and commander reach boundaries differ");
  }
  const CommanderEnv env(target.width(), target.height(), episode);
  const L2Similarity l2;
  Rng rng(cfg.noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SketchResult result{Canvas(target.width(), target.height()), Canvas(target.width(), target.height()), {}};
  CommanderState imag = env.reset(target);
  Eigen::Vector2d drift = Eigen::Vector2d::Zero();
  result.trace.width = target.width();
  result.trace.height = target.height();
  result.trace.sync = cfg.sync;
  result.trace.start = executor.current();
  PixelCoord real_px = physical_to_pixel(result.trace.start.position, mapping);
  result.trace.start_pixel = real_px;
  if (cfg.sync) imag.pos = real_px;

  for (int t = 0; t < episode.episode_length; ++t) {
    SketchRecord rec;
    rec.command = commander.act(imag, target);
    const auto decoded = decode_offset(rec.command, imag.pos, episode, target.width(), target.height());
    rec.goal = quantized_goal(rec.command, imag.pos, decoded.target, mapping, stroker);
    const auto exec = executor.execute(rec.goal);
    rec.action = exec.action;

    if (cfg.noise.position_sigma_cm > 0.0) {
      drift.x() += cfg.noise.position_sigma_cm * gauss(rng);
      drift.y() += cfg.noise.position_sigma_cm * gauss(rng);
    }
    rec.reached = exec.reached;
    rec.reached.position.x += drift.x();
    rec.reached.position.y += drift.y();
    if (cfg.noise.z_sigma_cm > 0.0) rec.reached.position.z += cfg.noise.z_sigma_cm * gauss(rng);
    if (cfg.noise.rotation_sigma > 0.0) {
      rec.reached.roll += cfg.noise.rotation_sigma * gauss(rng);
      rec.reached.pitch += cfg.noise.rotation_sigma * gauss(rng);
    }

    rec.contact = contact_test(rec.reached, cfg.contact_threshold_cm);
    rec.real_from = real_px;
    rec.real_to = physical_to_pixel(rec.reached.position, mapping);
    rasterize_segment(result.real, rec.real_from, rec.real_to, rec.contact);
    real_px = rec.real_to;

    rec.imaginary_from = imag.pos;
    if (cfg.sync) {
      rec.imaginary_to = rec.real_to;
      rec.imaginary_down = rec.contact;
      rasterize_segment(imag.canvas, imag.pos, rec.imaginary_to, rec.imaginary_down);
      imag.pos = rec.imaginary_to;
      imag.t += 1;
    } else {
      auto step = env.step(imag, rec.command, target, l2);
      rec.imaginary_to = step.stroke.target;
      rec.imaginary_down = step.stroke.pen_down;
      imag = std::move(step.next);
    }
    rec.imaginary_hash = imag.canvas.hash();
    rec.real_hash = result.real.hash();
    result.trace.records.push_back(rec);
  }
  result.imaginary = imag.canvas;
  return result;
}

Canvas commander_rollout(const Canvas& target, CommanderPolicy& commander, const CommanderEpisodeConfig& episode,
                         std::vector<StrokeRecord>* strokes) {
  const CommanderEnv env(target.width(), target.height(), episode);
  const L2Similarity l2;
  CommanderState s = env.reset(target);
  double score = l2.score(s.canvas, target);
  for (int t = 0; t < episode.episode_length; ++t) {
    const auto cmd = commander.act(s, target);
    double next_score = 0.0;
    auto step = env.step(s, cmd, target, l2, score, &next_score);
    if (strokes) strokes->push_back({step.stroke.pen_down, s.pos, step.stroke.target, step.reward});
    s = std::move(step.next);
    score = next_score;
  }
  return s.canvas;
}

std::pair<Canvas, Canvas> replay_trace(const SketchTrace& trace) {
  Canvas real(trace.width, trace.height), imag(trace.width, trace.height);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    rasterize_segment(real, r.real_from, r.real_to, r.contact);
    rasterize_segment(imag, r.imaginary_from, r.imaginary_to, r.imaginary_down);
    if (real.hash() != r.real_hash || imag.hash() != r.imaginary_hash) {
      throw std::runtime_error("trace record " + std::to_string(i) + " does not reproduce its canvas hashes");
    }
  }
  return {real, imag};
}

namespace {

json pose_json(const PenPose& p) {
  return {{"x", p.position.x}, {"y", p.position.y}, {"z", p.position.z}, {"roll", p.roll}, {"pitch", p.pitch}};
}

PenPose pose_from(const json& j) {
  return {{j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()},
          j.at("roll").get<double>(), j.at("pitch").get<double>()};
}

json px_json(PixelCoord p) { return {p.x, p.y}; }
PixelCoord px_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

void write_sketch_trace(const SketchTrace& trace, std::ostream& out) {
  json header = {{"format", "sketchrl-sketch-trace"}, {"version", 1},      {"width", trace.width},
                 {"height", trace.height},           {"sync", trace.sync}, {"start", pose_json(trace.start)},
                 {"start_pixel", px_json(trace.start_pixel)}};
  out << header.dump() << '\n';
  for (const auto& r : trace.records) {
    json j;
    j["command"] = {r.command.down, r.command.dx, r.command.dy};
    j["goal"] = {{"command", {r.goal.command.down, r.goal.command.dx, r.goal.command.dy}},
                 {"displacement", {r.goal.displacement.x(), r.goal.displacement.y(), r.goal.displacement.z()}}};
    j["action"] = r.action;
    j["reached"] = pose_json(r.reached);
    j["contact"] = r.contact;
    j["real"] = {{"from", px_json(r.real_from)}, {"to", px_json(r.real_to)}};
    j["imaginary"] = {{"from", px_json(r.imaginary_from)}, {"to", px_json(r.imaginary_to)}, {"down", r.imaginary_down}};
    j["imaginary_hash"] = hex64(r.imaginary_hash);
    j["real_hash"] = hex64(r.real_hash);
    out << j.dump() << '\n';
  }
}

SketchTrace read_sketch_trace(std::istream& in) {
  SketchTrace trace;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty sketch trace");
  const json header = json::parse(line);
  if (header.value("format", "") != "sketchrl-sketch-trace") throw std::runtime_error("not a sketch trace");
  trace.width = header.at("width").get<int>();
  trace.height = header.at("height").get<int>();
  trace.sync = header.at("sync").get<bool>();
  trace.start = pose_from(header.at("start"));
  trace.start_pixel = px_from(header.at("start_pixel"));
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      SketchRecord r;
      r.command = {j.at("command").at(0).get<double>(), j.at("command").at(1).get<double>(),
                   j.at("command").at(2).get<double>()};
      const auto& g = j.at("goal");
      r.goal.command = {g.at("command").at(0).get<double>(), g.at("command").at(1).get<double>(),
                        g.at("command").at(2).get<double>()};
      r.goal.displacement = {g.at("displacement").at(0).get<double>(), g.at("displacement").at(1).get<double>(),
                             g.at("displacement").at(2).get<double>()};
      r.action = j.at("action").get<StrokerAction>();
      r.reached = pose_from(j.at("reached"));
      r.contact = j.at("contact").get<bool>();
      r.real_from = px_from(j.at("real").at("from"));
      r.real_to = px_from(j.at("real").at("to"));
      r.imaginary_from = px_from(j.at("imaginary").at("from"));
      r.imaginary_to = px_from(j.at("imaginary").at("to"));
      r.imaginary_down = j.at("imaginary").at("down").get<bool>();
      r.imaginary_hash = std::stoull(j.at("imaginary_hash").get<std::string>(), nullptr, 16);
      r.real_hash = std::stoull(j.at("real_hash").get<std::string>(), nullptr, 16);
      trace.records.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("sketch trace line " + std::to_string(n) + ": " + e.what());
    }
  }
  return trace;
}

std::string sketch_to_svg(const SketchTrace& trace, const CanvasMapping& mapping) {
  const double side = mapping.centimeters_per_side;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "cm\" height=\"" << side
     << "cm\" viewBox=\"0 0 " << side << ' ' << side << "\">\n";
  os << "<rect width=\"" << side << "\" height=\"" << side << "\" fill=\"white\"/>\n";
  std::vector<std::pair<double, double>> line;
  auto flush = [&]() {
    if (line.size() >= 2) {
      os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.1\" stroke-linecap=\"round\" points=\"";
      for (std::size_t i = 0; i < line.size(); ++i) {
        os << (i ? " " : "") << line[i].first << ',' << side - line[i].second;
      }
      os << "\"/>\n";
    }
    line.clear();
  };
  PhysicalCoord prev = trace.start.position;
  for (const auto& r : trace.records) {
    if (r.contact) {
      if (line.empty()) line.emplace_back(prev.x, prev.y);
      line.emplace_back(r.reached.position.x, r.reached.position.y);
    } else {
      flush();
    }
    prev = r.reached.position;
  }
  flush();
  os << "</svg>\n";
  return os.str();
}

}  // namespace sketchrl
