#pragma once

// Pressure-driven growth of the eversion body along the pipe network.
//
// The body grows only at the tip: material everted at time t stays where it
// was laid down. The wall ledger records (material coordinate, world
// position) for every growth increment; entries are appended while growing,
// popped while retracting, and never modified in between.

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "eversim/pipe_network.hpp"
#include "eversim/tip_kinematics.hpp"

namespace eversim::eversion {

enum class GrowthStatus { growing, holding, retracting, blocked };

struct LedgerEntry {
  double material_coordinate_m = 0.0;
  Eigen::Vector3d world_position = Eigen::Vector3d::Zero();

  bool operator==(const LedgerEntry&) const = default;
};

struct EversionState {
  double pressure_kpa = 0.0;
  double target_pressure_kpa = 0.0;
  double everted_length_m = 0.0;
  double max_length_m = 5.0;
  std::vector<LedgerEntry> wall_ledger;
  GrowthStatus status = GrowthStatus::holding;
};

// Linear growth above a threshold pressure.
struct GrowthParams {
  double rate_coeff_m_per_s_kpa = 0.02;
  double threshold_kpa = 10.0;
};

// First-order regulator: pressure approaches the target by (1 - exp(-dt/tau)).
EversionState pressure_step(const EversionState& state, double dt_s, double regulator_tau_s);

// Length the current pressure would evert during dt, capped by max_length.
double growth_demand(const EversionState& state, double dt_s, const GrowthParams& params);

using PositionAt = std::function<Eigen::Vector3d(double material_coordinate_m)>;

// Grows by growth_demand, further capped by `available_m` (how far the path
// could actually advance). Appends one ledger entry at the new tip
// coordinate, positioned by `position_at` (straight along +z when empty).
EversionState growth_step(const EversionState& state, double dt_s, const GrowthParams& params,
                          double available_m = std::numeric_limits<double>::infinity(),
                          const PositionAt& position_at = {});

// One traversed segment. start_arclength is the path length at which the
// robot entered it.
struct Traversal {
  int segment = -1;
  bool forward = true;
  double start_arclength_m = 0.0;

  bool operator==(const Traversal&) const = default;
};

struct RobotPath {
  std::vector<Traversal> traversals;
  double offset_m = 0.0;  // within the last traversal

  bool operator==(const RobotPath&) const = default;

  double arclength() const noexcept {
    return traversals.empty() ? 0.0 : traversals.back().start_arclength_m + offset_m;
  }
  const Traversal& current() const { return traversals.back(); }
  net::SegmentCursor cursor() const { return {current().segment, current().forward, offset_m}; }
  bool contains_segment(int segment) const;
};

RobotPath start_path(const net::PipeNetwork& network, int start_node, int start_segment);

struct JunctionChoice {
  int node = -1;
  int from_segment = -1;
  int chosen_segment = -1;
  bool straight_through = false;
  double steer_azimuth_deg = 0.0;
  double at_arclength_m = 0.0;
};

struct AdvanceResult {
  RobotPath path;
  double advanced_m = 0.0;
  double residual_m = 0.0;  // requested length that could not be used
  bool blocked = false;
  std::string block_reason;
  std::vector<JunctionChoice> junctions;
};

// Moves the tip `length_m` along the centerline. At a junction the branch
// whose azimuth is closest to the steer azimuth is entered (ties to the
// lexicographically lowest segment id). Below the deadband the
// straight-through branch is taken, or growth blocks if there is none.
AdvanceResult advance_along_network(const RobotPath& path, const net::PipeNetwork& network, double length_m,
                                    const tip::BendCommand& steer, double deadband_deg = 15.0);

// World position of the centerline at a material coordinate on the path.
Eigen::Vector3d position_at(const RobotPath& path, const net::PipeNetwork& network, double arclength_m);
Eigen::Vector3d tip_position(const RobotPath& path, const net::PipeNetwork& network);
Eigen::Isometry3d tip_base_frame(const RobotPath& path, const net::PipeNetwork& network);

struct RetractResult {
  RobotPath path;
  EversionState state;
};

// Pulls the body back by length_m. Throws InputError when length_m is
// negative or exceeds the everted length.
RetractResult retract(const RobotPath& path, const EversionState& state, double length_m);

const char* to_string(GrowthStatus status) noexcept;
GrowthStatus parse_status(const std::string& text);

}  // namespace eversim::eversion
