#include "eversim/eversion.hpp"

#include <algorithm>
#include <cmath>

#include "eversim/error.hpp"
#include "eversim/units.hpp"

namespace eversim::eversion {

EversionState pressure_step(const EversionState& state, double dt_s, double regulator_tau_s) {
  if (!(dt_s > 0.0)) throw InputError("pressure_step: dt must be > 0");
  if (!(regulator_tau_s > 0.0)) throw InputError("pressure_step: regulator tau must be > 0");
  EversionState out = state;
  const double gain = 1.0 - std::exp(-dt_s / regulator_tau_s);
  out.pressure_kpa = state.pressure_kpa + (state.target_pressure_kpa - state.pressure_kpa) * gain;
  if (out.pressure_kpa < 0.0) out.pressure_kpa = 0.0;
  return out;
}

namespace {

double raw_growth(const EversionState& state, double dt_s, const GrowthParams& params) {
  return params.rate_coeff_m_per_s_kpa * std::max(0.0, state.pressure_kpa - params.threshold_kpa) * dt_s;
}

}  // namespace

double growth_demand(const EversionState& state, double dt_s, const GrowthParams& params) {
  if (!(dt_s > 0.0)) throw InputError("growth: dt must be > 0");
  const double room = std::max(0.0, state.max_length_m - state.everted_length_m);
  return std::min(raw_growth(state, dt_s, params), room);
}

EversionState growth_step(const EversionState& state, double dt_s, const GrowthParams& params, double available_m,
                          const PositionAt& position_at) {
  const double raw = raw_growth(state, dt_s, params);
  const double demand = growth_demand(state, dt_s, params);
  const double dl = std::min(demand, std::max(0.0, available_m));

  EversionState out = state;
  if (raw <= 0.0) {
    out.status = GrowthStatus::holding;
    return out;
  }
  if (dl > 0.0) {
    out.everted_length_m = std::min(state.everted_length_m + dl, state.max_length_m);
    const Eigen::Vector3d where =
        position_at ? position_at(out.everted_length_m) : Eigen::Vector3d(0.0, 0.0, out.everted_length_m);
    out.wall_ledger.push_back({out.everted_length_m, where});
  }
  out.status = dl < raw ? GrowthStatus::blocked : GrowthStatus::growing;
  return out;
}

bool RobotPath::contains_segment(int segment) const {
  return std::any_of(traversals.begin(), traversals.end(), [&](const Traversal& t) { return t.segment == segment; });
}

RobotPath start_path(const net::PipeNetwork& network, int start_node, int start_segment) {
  const net::PipeSegment& s = network.segment(start_segment);
  if (s.from != start_node && s.to != start_node) throw InputError("start segment does not touch start node");
  RobotPath p;
  p.traversals.push_back({start_segment, s.from == start_node, 0.0});
  return p;
}

namespace {

struct Pick {
  int segment = -1;
  bool straight = false;
  std::string why;
};

Pick choose_branch(const net::PipeNetwork& network, int node, int arrival, const std::vector<int>& exits,
                   const tip::BendCommand& steer, double deadband_deg) {
  if (exits.size() == 1) return {exits.front(), false, {}};

  const net::Junction* junction = network.junction_at(node);
  if (junction == nullptr) return {-1, false, "junction without a branch table"};

  std::vector<const net::JunctionBranch*> options;
  for (const auto& b : junction->branches) {
    if (b.segment != arrival) options.push_back(&b);
  }

  if (steer.magnitude_deg < deadband_deg) {
    for (const auto* b : options) {
      if (b->straight) return {b->segment, true, {}};
    }
    return {-1, false, "steer inside deadband and no straight-through branch"};
  }

  const double want = normalize_azimuth_deg(steer.direction_deg);
  const net::JunctionBranch* best = nullptr;
  double best_d = 0.0;
  for (const auto* b : options) {
    if (!b->azimuth_deg) continue;
    const double d = azimuth_distance_deg(want, *b->azimuth_deg);
    if (best == nullptr || d < best_d - 1e-12 ||
        (std::fabs(d - best_d) <= 1e-12 && network.segment(b->segment).id < network.segment(best->segment).id)) {
      best = b;
      best_d = d;
    }
  }
  if (best == nullptr) return {-1, false, "no steerable branch"};
  return {best->segment, false, {}};
}

}  // namespace

AdvanceResult advance_along_network(const RobotPath& path, const net::PipeNetwork& network, double length_m,
                                    const tip::BendCommand& steer, double deadband_deg) {
  if (!(length_m >= 0.0)) throw InputError("advance length must be >= 0");
  if (path.traversals.empty()) throw InputError("path has no segments");

  AdvanceResult r;
  r.path = path;
  double remaining = length_m;
  while (remaining > 0.0) {
    const Traversal here = r.path.traversals.back();
    const double seg_len = network.segment(here.segment).length_m;
    const double room = std::max(0.0, seg_len - r.path.offset_m);
    if (remaining <= room) {
      r.path.offset_m += remaining;
      r.advanced_m += remaining;
      remaining = 0.0;
      break;
    }
    r.advanced_m += room;
    remaining -= room;
    r.path.offset_m = seg_len;

    const int node = network.exit_node(here.segment, here.forward);
    std::vector<int> exits;
    for (int s : network.incident(node)) {
      if (s != here.segment) exits.push_back(s);
    }
    if (exits.empty()) {
      r.block_reason = "dead end at node '" + network.node(node).id + "'";
      break;
    }
    const Pick pick = choose_branch(network, node, here.segment, exits, steer, deadband_deg);
    if (pick.segment < 0) {
      r.block_reason = pick.why + " at node '" + network.node(node).id + "'";
      break;
    }
    const double entered_at = here.start_arclength_m + seg_len;
    if (exits.size() > 1) {
      r.junctions.push_back({node, here.segment, pick.segment, pick.straight, steer.direction_deg, entered_at});
    }
    r.path.traversals.push_back({pick.segment, network.segment(pick.segment).from == node, entered_at});
    r.path.offset_m = 0.0;
  }
  r.residual_m = remaining;
  r.blocked = remaining > 0.0;
  return r;
}

Eigen::Vector3d position_at(const RobotPath& path, const net::PipeNetwork& network, double arclength_m) {
  if (path.traversals.empty()) throw InputError("path has no segments");
  std::size_t i = path.traversals.size() - 1;
  while (i > 0 && path.traversals[i].start_arclength_m > arclength_m) --i;
  const Traversal& t = path.traversals[i];
  const double len = network.segment(t.segment).length_m;
  const double offset = std::clamp(arclength_m - t.start_arclength_m, 0.0, len);
  return network.point({t.segment, t.forward, offset});
}

Eigen::Vector3d tip_position(const RobotPath& path, const net::PipeNetwork& network) {
  return network.point(path.cursor());
}

Eigen::Isometry3d tip_base_frame(const RobotPath& path, const net::PipeNetwork& network) {
  return network.frame(path.cursor());
}

RetractResult retract(const RobotPath& path, const EversionState& state, double length_m) {
  if (!(length_m >= 0.0)) throw InputError("retract length must be >= 0");
  if (length_m > state.everted_length_m + 1e-12) {
    throw InputError("cannot retract " + std::to_string(length_m) + " m with only " +
                     std::to_string(state.everted_length_m) + " m everted");
  }
  RetractResult r{path, state};
  if (length_m == 0.0) return r;

  const double new_len = std::max(0.0, state.everted_length_m - length_m);
  r.state.everted_length_m = new_len;
  while (!r.state.wall_ledger.empty() && r.state.wall_ledger.back().material_coordinate_m > new_len) {
    r.state.wall_ledger.pop_back();
  }
  while (r.path.traversals.size() > 1 && r.path.traversals.back().start_arclength_m >= new_len - 1e-12) {
    r.path.traversals.pop_back();
  }
  r.path.offset_m = std::max(0.0, new_len - r.path.traversals.back().start_arclength_m);
  r.state.status = GrowthStatus::retracting;
  return r;
}

const char* to_string(GrowthStatus status) noexcept {
  switch (status) {
    case GrowthStatus::growing:
      return "growing";
    case GrowthStatus::holding:
      return "holding";
    case GrowthStatus::retracting:
      return "retracting";
    case GrowthStatus::blocked:
      return "blocked";
  }
  return "unknown";
}

GrowthStatus parse_status(const std::string& text) {
  if (text == "growing") return GrowthStatus::growing;
  if (text == "holding") return GrowthStatus::holding;
  if (text == "retracting") return GrowthStatus::retracting;
  if (text == "blocked") return GrowthStatus::blocked;
  throw InputError("unknown growth status '" + text + "'");
}

}  // namespace eversim::eversion
