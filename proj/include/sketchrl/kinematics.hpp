#pragma once

#include <Eigen/Geometry>
#include <array>
#include <filesystem>
#include <string>

#include "sketchrl/geometry.hpp"

namespace sketchrl {

inline constexpr int kJointCount = 6;

using JointVector = std::array<double, kJointCount>;

/// Standard Denavit-Hartenberg row: Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
/// Lengths in meters, angles in radians.
struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct JointLimit {
  double lower = -3.141592653589793;
  double upper = 3.141592653589793;
};

/// Six-link serial chain with a rigid pen holder. The canvas frame has its
/// origin at the canvas corner (pixel 0, 0), x and y along the canvas axes
/// and z up out of the surface. The pentip frame has z pointing from the tip
/// up the pen body, so a vertical pen has identity orientation.
struct KinematicChain {
  std::array<DhRow, kJointCount> links{};
  std::array<JointLimit, kJointCount> limits{};
  Eigen::Isometry3d pentip_offset = Eigen::Isometry3d::Identity();  // flange -> pentip
  Eigen::Isometry3d canvas_frame = Eigen::Isometry3d::Identity();   // base -> canvas

  void validate() const;
  bool within_limits(const JointVector& q) const;
  JointVector clamp(const JointVector& q) const;
  /// Sum of |a| + |d| over links plus the pentip offset length, meters.
  double reach() const;
};

/// Pentip position in canvas-frame centimeters and pen tilt.
struct PenPose {
  PhysicalCoord position;
  double roll = 0.0;   // gamma
  double pitch = 0.0;  // psi
};

struct RollPitch {
  double roll = 0.0;
  double pitch = 0.0;
  bool gimbal = false;
};

Eigen::Isometry3d dh_transform(const DhRow& row, double joint);

/// Base-frame pentip transform (meters). Does not check limits.
Eigen::Isometry3d pentip_transform(const KinematicChain& chain, const JointVector& q);

/// Throws std::out_of_range when a joint is outside its limits.
PenPose forward_kinematics(const KinematicChain& chain, const JointVector& q);

/// Roll and pitch of R = Rx(roll) Ry(pitch) Rz(yaw); yaw is discarded.
/// Rejects matrices that are not proper rotations (tolerance 1e-6). Near
/// pitch = +-pi/2 roll is reported as 0 and `gimbal` is set.
RollPitch euler_roll_pitch(const Eigen::Matrix3d& r);

Eigen::Matrix3d rotation_from_roll_pitch_yaw(double roll, double pitch, double yaw);

/// Fixed-axis rpy as used in chain files: Rz(yaw) Ry(pitch) Rx(roll).
Eigen::Matrix3d rotation_from_fixed_rpy(double roll, double pitch, double yaw);

/// UR5e-like proportions holding a 20 cm pen case over a 21 cm canvas.
KinematicChain default_chain();

KinematicChain parse_chain(const std::string& text);
KinematicChain load_chain(const std::filesystem::path& path);
std::string chain_to_json(const KinematicChain& chain);

}  // namespace sketchrl
