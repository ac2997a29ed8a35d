#include "eversim/tip_kinematics.hpp"

#include <algorithm>
#include <cmath>

#include "eversim/error.hpp"
#include "eversim/units.hpp"

namespace eversim::tip {

namespace {

// Rotation axis (in the base plane) that tilts +z towards azimuth phi.
Eigen::Vector3d bend_axis(double direction_rad) {
  return {-std::sin(direction_rad), std::cos(direction_rad), 0.0};
}

Eigen::Vector3d guide_point(int tendon, double radius) {
  const double psi = deg_to_rad(TipGeometry::tendon_azimuth_deg(tendon));
  return {radius * std::cos(psi), radius * std::sin(psi), 0.0};
}

BendCommand bend_from_direction(const Eigen::Vector3d& dir, const TipGeometry& geometry) {
  const double n = dir.norm();
  if (n == 0.0) return {};
  const Eigen::Vector3d u = dir / n;
  const double theta = rad_to_deg(std::atan2(std::hypot(u.x(), u.y()), u.z()));
  if (theta == 0.0) return {};
  return sanitize({theta, rad_to_deg(std::atan2(u.y(), u.x()))}, geometry);
}

}  // namespace

void TipGeometry::validate() const {
  if (disc_count < 2) throw DomainError("tip disc_count must be >= 2");
  if (!(disc_spacing_m > 0.0)) throw DomainError("tip disc_spacing must be > 0");
  if (!(disc_diameter_m > 0.0)) throw DomainError("tip disc_diameter must be > 0");
  if (!(tendon_pitch_radius_m > 0.0) || !(tendon_pitch_radius_m < disc_diameter_m / 2.0)) {
    throw DomainError("tip tendon_pitch_radius must be in (0, disc_diameter/2)");
  }
  if (!(max_bend_deg > 0.0) || max_bend_deg > 180.0) throw DomainError("tip max_bend must be in (0, 180]");
}

BendCommand sanitize(const BendCommand& cmd, const TipGeometry& geometry, bool* clamped) {
  BendCommand out;
  const double m = std::isfinite(cmd.magnitude_deg) ? cmd.magnitude_deg : 0.0;
  out.magnitude_deg = std::clamp(m, 0.0, geometry.max_bend_deg);
  out.direction_deg = std::isfinite(cmd.direction_deg) ? normalize_azimuth_deg(cmd.direction_deg) : 0.0;
  if (clamped != nullptr) *clamped = out.magnitude_deg != m;
  return out;
}

JointAngle per_joint_angle(double total_bend_deg, const TipGeometry& geometry) {
  JointAngle j;
  const double total = std::clamp(total_bend_deg, 0.0, geometry.max_bend_deg);
  j.clamped = total != total_bend_deg;
  j.angle_deg = total / geometry.joint_count();
  return j;
}

TendonDisplacements tendon_displacements(const BendCommand& cmd, const TipGeometry& geometry) {
  const BendCommand c = sanitize(cmd, geometry);
  const double theta = deg_to_rad(c.magnitude_deg);
  TendonDisplacements d{};
  for (int i = 0; i < kTendonCount; ++i) {
    const double rel = deg_to_rad(c.direction_deg - TipGeometry::tendon_azimuth_deg(i));
    d[i] = std::max(0.0, geometry.tendon_pitch_radius_m * theta * std::cos(rel));
  }
  return d;
}

ServoAngles servo_angles_for(const TendonDisplacements& displacements, const mech::SpoolSpec& spool,
                             const mech::ServoSpec& servo) {
  spool.validate();
  ServoAngles out;
  for (int i = 0; i < kTendonCount; ++i) {
    const double raw = rad_to_deg(displacements[i] / spool.radius_m);
    const double a = std::clamp(raw, 0.0, servo.operating_angle_deg);
    out.angles_deg[i] = a;
    out.clamped[i] = a != raw;
  }
  return out;
}

TendonDisplacements displacements_from_servo_angles(const ServoAngles& angles, const mech::SpoolSpec& spool) {
  TendonDisplacements d{};
  for (int i = 0; i < kTendonCount; ++i) d[i] = deg_to_rad(angles.angles_deg[i]) * spool.radius_m;
  return d;
}

BendCommand bend_from_displacements(const TendonDisplacements& d, const TipGeometry& geometry) {
  const double x = d[0] - d[2];
  const double y = d[1] - d[3];
  const double arc = std::hypot(x, y);
  if (arc == 0.0) return {};
  BendCommand b;
  b.magnitude_deg = rad_to_deg(arc / geometry.tendon_pitch_radius_m);
  b.direction_deg = normalize_azimuth_deg(rad_to_deg(std::atan2(y, x)));
  return b;
}

ContinuumState solve_state(const BendCommand& cmd, const TipGeometry& geometry, const mech::SpoolSpec& spool,
                           const mech::ServoSpec& servo) {
  ContinuumState s;
  s.bend = sanitize(cmd, geometry, &s.bend_clamped);
  s.joint_angle_deg = per_joint_angle(s.bend.magnitude_deg, geometry).angle_deg;
  s.tendon_displacements_m = tendon_displacements(s.bend, geometry);
  s.servo = servo_angles_for(s.tendon_displacements_m, spool, servo);
  return s;
}

std::vector<Eigen::Isometry3d> disc_frames(const BendCommand& cmd, const TipGeometry& geometry) {
  const BendCommand c = sanitize(cmd, geometry);
  const double joint = deg_to_rad(per_joint_angle(c.magnitude_deg, geometry).angle_deg);
  const Eigen::AngleAxisd rotation(joint, bend_axis(deg_to_rad(c.direction_deg)));
  const Eigen::Translation3d step(0.0, 0.0, geometry.disc_spacing_m);

  std::vector<Eigen::Isometry3d> frames;
  frames.reserve(geometry.disc_count);
  Eigen::Isometry3d frame = Eigen::Isometry3d::Identity();
  frames.push_back(frame);
  for (int k = 0; k < geometry.joint_count(); ++k) {
    frame = frame * step * rotation;
    frames.push_back(frame);
  }
  return frames;
}

TipPose forward_tip_pose(const BendCommand& cmd, const TipGeometry& geometry) {
  const auto frames = disc_frames(cmd, geometry);
  const Eigen::Isometry3d& last = frames.back();
  TipPose pose;
  pose.position = last.translation();
  pose.heading = (last.linear() * Eigen::Vector3d::UnitZ()).normalized();
  return pose;
}

TipPose forward_tip_pose(const BendCommand& cmd, const TipGeometry& geometry, const Eigen::Isometry3d& base) {
  const TipPose local = forward_tip_pose(cmd, geometry);
  TipPose world;
  world.position = base * local.position;
  world.heading = (base.linear() * local.heading).normalized();
  return world;
}

double tendon_polyline_length(const BendCommand& cmd, const TipGeometry& geometry, int tendon) {
  if (tendon < 0 || tendon >= kTendonCount) throw InputError("tendon index out of range");
  const auto frames = disc_frames(cmd, geometry);
  const Eigen::Vector3d local = guide_point(tendon, geometry.tendon_pitch_radius_m);
  double length = 0.0;
  Eigen::Vector3d prev = frames.front() * local;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const Eigen::Vector3d p = frames[k] * local;
    length += (p - prev).norm();
    prev = p;
  }
  return length;
}

BendCommand joystick_to_bend(double x, double y, const TipGeometry& geometry) {
  if (!std::isfinite(x)) x = 0.0;
  if (!std::isfinite(y)) y = 0.0;
  const double r = std::min(1.0, std::hypot(x, y));
  BendCommand b;
  b.magnitude_deg = geometry.max_bend_deg * r;
  b.direction_deg = b.magnitude_deg == 0.0 ? 0.0 : normalize_azimuth_deg(rad_to_deg(std::atan2(y, x)));
  return b;
}

std::array<double, 2> bend_to_joystick(const BendCommand& cmd, const TipGeometry& geometry) {
  const BendCommand c = sanitize(cmd, geometry);
  const double r = c.magnitude_deg / geometry.max_bend_deg;
  const double phi = deg_to_rad(c.direction_deg);
  return {r * std::cos(phi), r * std::sin(phi)};
}

BendCommand aim_at(const Eigen::Vector3d& target, const TipGeometry& geometry, const Eigen::Isometry3d& base,
                   int iterations) {
  const Eigen::Vector3d local = base.inverse() * target;
  BendCommand cmd = bend_from_direction(local, geometry);
  for (int i = 0; i < iterations; ++i) {
    const TipPose pose = forward_tip_pose(cmd, geometry);
    const BendCommand next = bend_from_direction(local - pose.position, geometry);
    const bool settled = std::fabs(next.magnitude_deg - cmd.magnitude_deg) < 1e-10 &&
                         azimuth_distance_deg(next.direction_deg, cmd.direction_deg) < 1e-10;
    cmd = next;
    if (settled) break;
  }
  return cmd;
}

}  // namespace eversim::tip
