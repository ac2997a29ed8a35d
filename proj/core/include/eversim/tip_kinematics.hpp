#pragma once

// Kinematics of the four-tendon disc-and-u-joint steering tip.
//
// The tip is a chain of `disc_count` discs. Disc 0 sits on the base frame.
// Each following disc is reached by translating `disc_spacing` along the
// local axis and then rotating by the per-joint angle about the in-plane
// axis orthogonal to the bend azimuth. All joints carry the same angle.
//
// Tendons run through guide holes at `tendon_pitch_radius` on every disc at
// azimuths 0, 90, 180 and 270 degrees. Bending towards azimuth phi shortens
// the tendons on that side; each servo only pulls, so the far side goes slack.
//
// External quantities (commands, config, telemetry) use degrees; the frame
// maths below works in radians.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <vector>

#include "eversim/mech_calc.hpp"

namespace eversim::tip {

inline constexpr int kTendonCount = 4;

struct TipGeometry {
  int disc_count = 6;
  double disc_spacing_m = 20.0e-3;
  double disc_diameter_m = 45.0e-3;
  // r * pi/2 = 14.5 mm.
  double tendon_pitch_radius_m = 9.23e-3;
  double max_bend_deg = 90.0;

  void validate() const;

  int joint_count() const noexcept { return disc_count - 1; }
  double backbone_length_m() const noexcept { return joint_count() * disc_spacing_m; }
  static double tendon_azimuth_deg(int tendon) noexcept { return 90.0 * tendon; }
};

struct BendCommand {
  double magnitude_deg = 0.0;  // [0, max_bend]
  double direction_deg = 0.0;  // [0, 360)
};

struct JointAngle {
  double angle_deg = 0.0;
  bool clamped = false;
};

struct ServoAngles {
  std::array<double, kTendonCount> angles_deg{};
  std::array<bool, kTendonCount> clamped{};

  bool any_clamped() const noexcept { return clamped[0] || clamped[1] || clamped[2] || clamped[3]; }
};

using TendonDisplacements = std::array<double, kTendonCount>;

// Immutable snapshot of the tip for one command.
struct ContinuumState {
  BendCommand bend;
  double joint_angle_deg = 0.0;
  bool bend_clamped = false;
  TendonDisplacements tendon_displacements_m{};
  ServoAngles servo;
};

struct TipPose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d heading = Eigen::Vector3d::UnitZ();
};

// Clamps magnitude into [0, max_bend] and wraps direction into [0, 360).
// `clamped`, when given, reports whether the magnitude had to be clamped.
BendCommand sanitize(const BendCommand& cmd, const TipGeometry& geometry, bool* clamped = nullptr);

JointAngle per_joint_angle(double total_bend_deg, const TipGeometry& geometry);

TendonDisplacements tendon_displacements(const BendCommand& cmd, const TipGeometry& geometry);

ServoAngles servo_angles_for(const TendonDisplacements& displacements, const mech::SpoolSpec& spool,
                             const mech::ServoSpec& servo);

// Inverse of servo_angles_for (no clamping): spool angle back to tendon pull.
TendonDisplacements displacements_from_servo_angles(const ServoAngles& angles, const mech::SpoolSpec& spool);

// Recovers the bend from tendon pulls. Opposite tendons are differenced so a
// slack antagonist contributes nothing.
BendCommand bend_from_displacements(const TendonDisplacements& displacements, const TipGeometry& geometry);

ContinuumState solve_state(const BendCommand& cmd, const TipGeometry& geometry, const mech::SpoolSpec& spool,
                           const mech::ServoSpec& servo);

// Frame of every disc relative to the base, disc 0 first.
std::vector<Eigen::Isometry3d> disc_frames(const BendCommand& cmd, const TipGeometry& geometry);

TipPose forward_tip_pose(const BendCommand& cmd, const TipGeometry& geometry);

// Tip pose expressed in the world, given the base frame (local z is the
// backbone axis, local x is azimuth 0).
TipPose forward_tip_pose(const BendCommand& cmd, const TipGeometry& geometry, const Eigen::Isometry3d& base);

double tendon_polyline_length(const BendCommand& cmd, const TipGeometry& geometry, int tendon);

BendCommand joystick_to_bend(double x, double y, const TipGeometry& geometry);

// Joystick deflection that reproduces `cmd` (inverse of joystick_to_bend).
std::array<double, 2> bend_to_joystick(const BendCommand& cmd, const TipGeometry& geometry);

// Bend that points the tip heading at `target` (world), solved by fixed-point
// iteration on the tip position. The bend is clamped to max_bend.
BendCommand aim_at(const Eigen::Vector3d& target, const TipGeometry& geometry, const Eigen::Isometry3d& base,
                   int iterations = 30);

}  // namespace eversim::tip
