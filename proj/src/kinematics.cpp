#include "sketchrl/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sketchrl {

using nlohmann::json;

void KinematicChain::validate() const {
  for (int i = 0; i < kJointCount; ++i) {
    const auto& l = links[i];
    if (!std::isfinite(l.a) || !std::isfinite(l.alpha) || !std::isfinite(l.d) ||
        !std::isfinite(l.theta_offset)) {
      throw std::invalid_argument("chain link " + std::to_string(i + 1) + " has non-finite parameters");
    }
    if (!(limits[i].lower < limits[i].upper)) {
      throw std::invalid_argument("joint " + std::to_string(i + 1) + " limits must satisfy lower < upper");
    }
  }
  if (!pentip_offset.matrix().allFinite() || !canvas_frame.matrix().allFinite()) {
    throw std::invalid_argument("chain frames must be finite");
  }
}

bool KinematicChain::within_limits(const JointVector& q) const {
  for (int i = 0; i < kJointCount; ++i) {
    if (!(q[i] >= limits[i].lower && q[i] <= limits[i].upper)) return false;
  }
  return true;
}

JointVector KinematicChain::clamp(const JointVector& q) const {
  JointVector out;
  for (int i = 0; i < kJointCount; ++i) out[i] = std::clamp(q[i], limits[i].lower, limits[i].upper);
  return out;
}

double KinematicChain::reach() const {
  double r = pentip_offset.translation().norm();
  for (const auto& l : links) r += std::abs(l.a) + std::abs(l.d);
  return r;
}

Eigen::Isometry3d dh_transform(const DhRow& row, double joint) {
  const double th = joint + row.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d m;
  m << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return Eigen::Isometry3d(m);
}

Eigen::Isometry3d pentip_transform(const KinematicChain& chain, const JointVector& q) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (int i = 0; i < kJointCount; ++i) t = t * dh_transform(chain.links[i], q[i]);
  return t * chain.pentip_offset;
}

PenPose forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  for (int i = 0; i < kJointCount; ++i) {
    if (!(q[i] >= chain.limits[i].lower && q[i] <= chain.limits[i].upper)) {
      throw std::out_of_range("joint " + std::to_string(i + 1) + " = " + std::to_string(q[i]) +
                              " outside [" + std::to_string(chain.limits[i].lower) + ", " +
                              std::to_string(chain.limits[i].upper) + "]");
    }
  }
  const Eigen::Isometry3d in_canvas = chain.canvas_frame.inverse() * pentip_transform(chain, q);
  const Eigen::Vector3d p = in_canvas.translation() * 100.0;
  const auto rp = euler_roll_pitch(in_canvas.rotation());
  return {{p.x(), p.y(), p.z()}, rp.roll, rp.pitch};
}

RollPitch euler_roll_pitch(const Eigen::Matrix3d& r) {
  constexpr double tol = 1e-6;
  if (!r.allFinite()) throw std::invalid_argument("rotation matrix is not finite");
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > tol) throw std::invalid_argument("rotation matrix is not orthonormal");
  if (std::abs(r.determinant() - 1.0) > tol) throw std::invalid_argument("rotation matrix has det != 1");
  RollPitch out;
  const double s = std::clamp(r(0, 2), -1.0, 1.0);
  out.pitch = std::asin(s);
  if (std::abs(std::abs(out.pitch) - std::numbers::pi / 2) < tol) {
    out.gimbal = true;
    out.roll = 0.0;
    return out;
  }
  out.roll = std::atan2(-r(1, 2), r(2, 2));
  if (out.roll <= -std::numbers::pi) out.roll = std::numbers::pi;
  return out;
}

Eigen::Matrix3d rotation_from_roll_pitch_yaw(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()))
      .toRotationMatrix();
}

Eigen::Matrix3d rotation_from_fixed_rpy(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

namespace {

Eigen::Isometry3d frame_from_json(const json& j) {
  const auto xyz = j.at("xyz").get<std::array<double, 3>>();
  const auto rpy = j.value("rpy", std::array<double, 3>{0.0, 0.0, 0.0});
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = rotation_from_fixed_rpy(rpy[0], rpy[1], rpy[2]);
  t.translation() = Eigen::Vector3d(xyz[0], xyz[1], xyz[2]);
  return t;
}

json frame_to_json(const Eigen::Isometry3d& t) {
  const Eigen::Matrix3d r = t.rotation();
  // Inverse of Rz(y) Ry(p) Rx(r).
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  const auto p = t.translation();
  return {{"xyz", {p.x(), p.y(), p.z()}}, {"rpy", {roll, pitch, yaw}}};
}

}  // namespace

KinematicChain default_chain() {
  constexpr double pi = std::numbers::pi;
  KinematicChain c;
  c.links = {{{0.0, pi / 2, 0.1625, 0.0},
              {-0.425, 0.0, 0.0, 0.0},
              {-0.3922, 0.0, 0.0, 0.0},
              {0.0, pi / 2, 0.1333, 0.0},
              {0.0, -pi / 2, 0.0997, 0.0},
              {0.0, 0.0, 0.0996, 0.0}}};
  c.limits = {{{-4.5, -2.0}, {-0.5, 1.5}, {-3.1, -1.2}, {-1.0, 1.5}, {-2.5, -0.5}, {-pi, pi}}};
  c.pentip_offset.linear() = rotation_from_fixed_rpy(pi, 0.0, 0.0);
  c.pentip_offset.translation() = Eigen::Vector3d(0.0, 0.0, 0.20);
  c.canvas_frame.translation() = Eigen::Vector3d(0.25, -0.105, 0.0);
  return c;
}

KinematicChain parse_chain(const std::string& text) {
  const json j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  KinematicChain c;
  const auto& links = j.at("links");
  if (!links.is_array() || links.size() != kJointCount) {
    throw std::invalid_argument("chain file must list exactly 6 links");
  }
  for (int i = 0; i < kJointCount; ++i) {
    const auto& l = links[i];
    c.links[i] = {l.at("a").get<double>(), l.at("alpha").get<double>(), l.at("d").get<double>(),
                  l.value("theta_offset", 0.0)};
    c.limits[i] = {l.at("lower").get<double>(), l.at("upper").get<double>()};
  }
  c.pentip_offset = frame_from_json(j.at("pentip_offset"));
  c.canvas_frame = frame_from_json(j.at("canvas_frame"));
  c.validate();
  return c;
}

KinematicChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open chain file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_chain(ss.str());
  } catch (const json::exception& e) {
    throw std::runtime_error("chain file " + path.string() + ": " + e.what());
  }
}

std::string chain_to_json(const KinematicChain& chain) {
  json j;
  j["format"] = "sketchrl-chain";
  j["version"] = 1;
  j["links"] = json::array();
  for (int i = 0; i < kJointCount; ++i) {
    const auto& l = chain.links[i];
    j["links"].push_back({{"a", l.a}, {"alpha", l.alpha}, {"d", l.d}, {"theta_offset", l.theta_offset},
                          {"lower", chain.limits[i].lower}, {"upper", chain.limits[i].upper}});
  }
  j["pentip_offset"] = frame_to_json(chain.pentip_offset);
  j["canvas_frame"] = frame_to_json(chain.canvas_frame);
  return j.dump(2);
}

}  // namespace sketchrl
