#include "eversim/pipe_network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "eversim/error.hpp"
#include "eversim/units.hpp"

namespace eversim::net {

Eigen::Vector3d circumcenter(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d n = ab.cross(ac);
  const double n2 = n.squaredNorm();
  if (n2 < 1e-24) throw DomainError("arc points are collinear");
  return a + (ab.squaredNorm() * ac - ac.squaredNorm() * ab).cross(n) / (2.0 * n2);
}

int PipeNetwork::add_node(PipeNode node) {
  if (find_node(node.id)) throw DomainError("duplicate node id '" + node.id + "'");
  nodes_.push_back(std::move(node));
  incident_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

int PipeNetwork::add_segment(PipeSegment s) {
  if (find_segment(s.id)) throw DomainError("duplicate segment id '" + s.id + "'");
  if (s.from < 0 || s.to < 0 || s.from >= static_cast<int>(nodes_.size()) ||
      s.to >= static_cast<int>(nodes_.size())) {
    throw DomainError("segment '" + s.id + "' references an unknown node");
  }
  if (s.from == s.to) throw DomainError("segment '" + s.id + "' starts and ends at the same node");
  if (!(s.diameter_m > 0.0)) throw DomainError("segment '" + s.id + "' diameter must be > 0");

  const Eigen::Vector3d a = nodes_[s.from].position;
  const Eigen::Vector3d b = nodes_[s.to].position;
  if (s.shape == SegmentShape::straight) {
    s.length_m = (b - a).norm();
  } else {
    Eigen::Vector3d c;
    try {
      c = circumcenter(a, s.via, b);
    } catch (const DomainError&) {
      throw DomainError("segment '" + s.id + "': arc via point is collinear with its end nodes");
    }
    const Eigen::Vector3d plane_n = (s.via - a).cross(b - a).normalized();
    s.arc_center = c;
    s.arc_radius_m = (a - c).norm();
    s.arc_e1 = (a - c) / s.arc_radius_m;
    s.arc_e2 = plane_n.cross(s.arc_e1);
    const Eigen::Vector3d cb = b - c;
    double sweep = std::atan2(cb.dot(s.arc_e2), cb.dot(s.arc_e1));
    if (sweep <= 0.0) sweep += 2.0 * kPi;
    s.length_m = s.arc_radius_m * sweep;
  }
  if (!(s.length_m > 0.0)) throw DomainError("segment '" + s.id + "' has zero length");

  segments_.push_back(std::move(s));
  const int idx = static_cast<int>(segments_.size()) - 1;
  incident_[segments_.back().from].push_back(idx);
  incident_[segments_.back().to].push_back(idx);
  return idx;
}

void PipeNetwork::add_junction(Junction j) {
  if (j.node < 0 || j.node >= static_cast<int>(nodes_.size())) throw DomainError("junction at unknown node");
  if (junction_at(j.node) != nullptr) throw DomainError("duplicate junction at node '" + nodes_[j.node].id + "'");
  junctions_.push_back(std::move(j));
}

void PipeNetwork::validate() const {
  if (nodes_.empty()) throw DomainError("network has no nodes");
  if (segments_.empty()) throw DomainError("network has no segments");

  std::vector<bool> seen(nodes_.size(), false);
  std::queue<int> open;
  open.push(0);
  seen[0] = true;
  while (!open.empty()) {
    const int n = open.front();
    open.pop();
    for (int s : incident_[n]) {
      const int other = segments_[s].from == n ? segments_[s].to : segments_[s].from;
      if (!seen[other]) {
        seen[other] = true;
        open.push(other);
      }
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!seen[i]) throw DomainError("network is not connected: node '" + nodes_[i].id + "' is unreachable");
  }

  for (const Junction& j : junctions_) {
    const std::string& name = nodes_[j.node].id;
    std::set<int> listed;
    std::vector<double> azimuths;
    int straight = 0;
    for (const JunctionBranch& b : j.branches) {
      const auto& inc = incident_[j.node];
      if (std::find(inc.begin(), inc.end(), b.segment) == inc.end()) {
        throw DomainError("junction '" + name + "' lists a segment that does not touch it");
      }
      if (!listed.insert(b.segment).second) throw DomainError("junction '" + name + "' lists a segment twice");
      if (b.straight) ++straight;
      if (!b.straight && !b.azimuth_deg) {
        throw DomainError("junction '" + name + "' branch needs an azimuth or straight: true");
      }
      if (b.azimuth_deg) {
        const double a = normalize_azimuth_deg(*b.azimuth_deg);
        for (double other : azimuths) {
          if (azimuth_distance_deg(a, other) < 1e-9) {
            throw DomainError("junction '" + name + "' has duplicate branch azimuths");
          }
        }
        azimuths.push_back(a);
      }
    }
    if (straight > 1) throw DomainError("junction '" + name + "' has more than one straight-through branch");
  }

  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (incident_[n].size() < 3) continue;
    const Junction* j = junction_at(static_cast<int>(n));
    if (j == nullptr) throw DomainError("node '" + nodes_[n].id + "' joins 3+ segments but has no junction table");
    // Every segment except one arrival must be selectable.
    if (j->branches.size() + 1 < incident_[n].size()) {
      throw DomainError("junction '" + nodes_[n].id + "' table does not cover its segments");
    }
  }
}

std::optional<int> PipeNetwork::find_node(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> PipeNetwork::find_segment(const std::string& id) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].id == id) return static_cast<int>(i);
  }
  return std::nullopt;
}

const Junction* PipeNetwork::junction_at(int node) const {
  for (const Junction& j : junctions_) {
    if (j.node == node) return &j;
  }
  return nullptr;
}

int PipeNetwork::exit_node(int segment, bool forward) const {
  const PipeSegment& s = this->segment(segment);
  return forward ? s.to : s.from;
}

int PipeNetwork::entry_node(int segment, bool forward) const {
  const PipeSegment& s = this->segment(segment);
  return forward ? s.from : s.to;
}

namespace {

Eigen::Vector3d point_at(const PipeNetwork& net, const PipeSegment& s, double along) {
  if (s.shape == SegmentShape::straight) {
    const Eigen::Vector3d a = net.node(s.from).position;
    const Eigen::Vector3d b = net.node(s.to).position;
    return a + (b - a) * (along / s.length_m);
  }
  const double t = along / s.arc_radius_m;
  return s.arc_center + s.arc_radius_m * (std::cos(t) * s.arc_e1 + std::sin(t) * s.arc_e2);
}

Eigen::Vector3d tangent_at(const PipeNetwork& net, const PipeSegment& s, double along) {
  if (s.shape == SegmentShape::straight) {
    return (net.node(s.to).position - net.node(s.from).position).normalized();
  }
  const double t = along / s.arc_radius_m;
  return -std::sin(t) * s.arc_e1 + std::cos(t) * s.arc_e2;
}

}  // namespace

Eigen::Vector3d PipeNetwork::point(const SegmentCursor& c) const {
  const PipeSegment& s = segment(c.segment);
  const double along = std::clamp(c.offset_m, 0.0, s.length_m);
  return point_at(*this, s, c.forward ? along : s.length_m - along);
}

Eigen::Vector3d PipeNetwork::tangent(const SegmentCursor& c) const {
  const PipeSegment& s = segment(c.segment);
  const double along = std::clamp(c.offset_m, 0.0, s.length_m);
  const Eigen::Vector3d t = tangent_at(*this, s, c.forward ? along : s.length_m - along);
  return c.forward ? t : Eigen::Vector3d(-t);
}

Eigen::Isometry3d PipeNetwork::frame(const SegmentCursor& c) const {
  const Eigen::Vector3d z = tangent(c);
  Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  if (z.cross(up).norm() < 1e-9) up = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d y = (up - up.dot(z) * z).normalized();
  const Eigen::Vector3d x = y.cross(z);
  Eigen::Isometry3d f = Eigen::Isometry3d::Identity();
  f.linear().col(0) = x;
  f.linear().col(1) = y;
  f.linear().col(2) = z;
  f.translation() = point(c);
  return f;
}

double PipeNetwork::distance_to_centerline(int segment_index, const Eigen::Vector3d& p) const {
  const PipeSegment& s = segment(segment_index);
  if (s.shape == SegmentShape::straight) {
    const Eigen::Vector3d a = node(s.from).position;
    const Eigen::Vector3d ab = node(s.to).position - a;
    const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    return (a + t * ab - p).norm();
  }
  const Eigen::Vector3d n = s.arc_e1.cross(s.arc_e2);
  const Eigen::Vector3d rel = p - s.arc_center;
  const double out_of_plane = rel.dot(n);
  const double in_plane = (rel - out_of_plane * n).norm();
  // Nearest point on the full circle; callers only use this for points on the swept part.
  return std::hypot(in_plane - s.arc_radius_m, out_of_plane);
}

const char* to_string(SegmentShape shape) noexcept {
  return shape == SegmentShape::straight ? "straight" : "arc";
}

}  // namespace eversim::net
