#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <string>
#include <vector>

namespace eversim::net {

struct PipeNode {
  std::string id;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

enum class SegmentShape { straight, arc };

// A pipe between two nodes. Arcs are the circle through from, via and to.
struct PipeSegment {
  std::string id;
  int from = -1;
  int to = -1;
  double diameter_m = 0.0508;
  SegmentShape shape = SegmentShape::straight;
  Eigen::Vector3d via = Eigen::Vector3d::Zero();

  // Filled by PipeNetwork::add_segment.
  double length_m = 0.0;
  Eigen::Vector3d arc_center = Eigen::Vector3d::Zero();
  double arc_radius_m = 0.0;
  Eigen::Vector3d arc_e1 = Eigen::Vector3d::Zero();
  Eigen::Vector3d arc_e2 = Eigen::Vector3d::Zero();
};

// Exit option at a junction. Azimuths are measured in the tip base frame of
// a robot arriving at the node, in degrees. The straight-through branch has no
// azimuth; it is taken when the steer magnitude is inside the deadband.
struct JunctionBranch {
  int segment = -1;
  std::optional<double> azimuth_deg;
  bool straight = false;
};

struct Junction {
  int node = -1;
  std::vector<JunctionBranch> branches;
};

// Position along a segment in the direction of travel.
struct SegmentCursor {
  int segment = -1;
  bool forward = true;
  double offset_m = 0.0;
};

class PipeNetwork {
 public:
  int add_node(PipeNode node);
  // Computes the segment geometry; throws DomainError for degenerate input.
  int add_segment(PipeSegment segment);
  void add_junction(Junction junction);

  // Throws DomainError unless the graph is connected, every node with three
  // or more segments has a junction table covering its segments, and branch
  // azimuths at each junction are unique.
  void validate() const;

  const std::vector<PipeNode>& nodes() const noexcept { return nodes_; }
  const std::vector<PipeSegment>& segments() const noexcept { return segments_; }
  const std::vector<Junction>& junctions() const noexcept { return junctions_; }
  const PipeNode& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  const PipeSegment& segment(int i) const { return segments_.at(static_cast<std::size_t>(i)); }

  std::optional<int> find_node(const std::string& id) const;
  std::optional<int> find_segment(const std::string& id) const;
  const std::vector<int>& incident(int node) const { return incident_.at(static_cast<std::size_t>(node)); }
  const Junction* junction_at(int node) const;

  // Node the cursor is travelling towards / away from.
  int exit_node(int segment, bool forward) const;
  int entry_node(int segment, bool forward) const;

  Eigen::Vector3d point(const SegmentCursor& c) const;
  Eigen::Vector3d tangent(const SegmentCursor& c) const;
  // Tip base frame on the centerline: z along travel, y towards world +z
  // where possible (x completes a right-handed frame).
  Eigen::Isometry3d frame(const SegmentCursor& c) const;

  double distance_to_centerline(int segment, const Eigen::Vector3d& p) const;

 private:
  std::vector<PipeNode> nodes_;
  std::vector<PipeSegment> segments_;
  std::vector<Junction> junctions_;
  std::vector<std::vector<int>> incident_;
};

// Circumcentre of three points; throws DomainError when they are collinear.
Eigen::Vector3d circumcenter(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);

const char* to_string(SegmentShape shape) noexcept;

}  // namespace eversim::net
