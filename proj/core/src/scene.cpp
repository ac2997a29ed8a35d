#include "eversim/scene.hpp"

#include <cmath>

#include "eversim/error.hpp"
#include "yaml_util.hpp"

namespace eversim::scene {

bool TerminalBox::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
}

std::optional<int> TerminalBox::wall_index(const std::string& name) const {
  for (std::size_t i = 0; i < kWallNames.size(); ++i) {
    if (name == kWallNames[i]) return static_cast<int>(i);
  }
  return std::nullopt;
}

TerminalBox make_terminal_box(std::string id, int entry_node, const Eigen::Vector3d& min, const Eigen::Vector3d& max,
                              int panel_divisions) {
  if (!((max - min).array() > 0.0).all()) throw DomainError("terminal '" + id + "' box has non-positive extent");
  if (panel_divisions < 1) throw DomainError("terminal '" + id + "' panel_divisions must be >= 1");
  TerminalBox box;
  box.id = std::move(id);
  box.entry_node = entry_node;
  box.min = min;
  box.max = max;
  box.panel_divisions = panel_divisions;

  const Eigen::Vector3d d = max - min;
  const Eigen::Vector3d X = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d Y = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d Z = Eigen::Vector3d::UnitZ();
  const int n = panel_divisions;

  // col_axis x row_axis is the inward normal of each wall.
  auto wall = [&](const char* name, Eigen::Vector3d origin, Eigen::Vector3d col, double width, Eigen::Vector3d row,
                  double height) {
    spray::TargetGrid g;
    g.name = name;
    g.rows = n;
    g.cols = n;
    g.origin = origin;
    g.col_axis = col;
    g.row_axis = row;
    g.cell_width_m = width / n;
    g.cell_height_m = height / n;
    box.walls.push_back(g);
  };
  wall("x_min", min, Y, d.y(), Z, d.z());
  wall("x_max", {max.x(), min.y(), min.z()}, Z, d.z(), Y, d.y());
  wall("y_min", min, Z, d.z(), X, d.x());
  wall("y_max", {min.x(), max.y(), min.z()}, X, d.x(), Z, d.z());
  wall("z_min", min, X, d.x(), Y, d.y());
  wall("z_max", {min.x(), min.y(), max.z()}, Y, d.y(), X, d.x());
  return box;
}

namespace {

Eigen::Vector3d unit_axis(const detail::YamlDoc& doc, const YAML::Node& node, const std::string& path) {
  const Eigen::Vector3d v = doc.vec3(node, path);
  if (v.norm() < 1e-12) throw doc.error(node, path, "axis must be non-zero");
  return v.normalized();
}

}  // namespace

Scene parse_scene(const std::string& text, const std::string& source) {
  detail::YamlDoc doc(text, source);
  doc.expect_format("eversim-scene", 1);
  const YAML::Node& root = doc.root();

  Scene scene;
  scene.source_text = text;
  scene.name = doc.string(root, "name", "name", std::string("unnamed"));

  const YAML::Node nodes = doc.require(root, "nodes", "nodes");
  if (!nodes.IsSequence() || nodes.size() == 0) throw doc.error(nodes, "nodes", "must be a non-empty list");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "nodes[" + std::to_string(i) + "]";
    net::PipeNode n;
    n.id = doc.string(nodes[i], "id", path + ".id");
    n.position = doc.vec3(doc.require(nodes[i], "position", path + ".position"), path + ".position");
    try {
      scene.network.add_node(std::move(n));
    } catch (const DomainError& e) {
      throw doc.error(nodes[i], path, e.what());
    }
  }

  auto node_ref = [&](const YAML::Node& parent, const std::string& key, const std::string& path) {
    const YAML::Node n = doc.require(parent, key, path);
    const std::string id = doc.as<std::string>(n, path);
    const auto idx = scene.network.find_node(id);
    if (!idx) throw doc.error(n, path, "unknown node '" + id + "'");
    return *idx;
  };
  auto segment_ref = [&](const YAML::Node& parent, const std::string& key, const std::string& path) {
    const YAML::Node n = doc.require(parent, key, path);
    const std::string id = doc.as<std::string>(n, path);
    const auto idx = scene.network.find_segment(id);
    if (!idx) throw doc.error(n, path, "unknown segment '" + id + "'");
    return *idx;
  };

  const YAML::Node segments = doc.require(root, "segments", "segments");
  if (!segments.IsSequence() || segments.size() == 0) {
    throw doc.error(segments, "segments", "must be a non-empty list");
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string path = "segments[" + std::to_string(i) + "]";
    const YAML::Node s = segments[i];
    net::PipeSegment seg;
    seg.id = doc.string(s, "id", path + ".id");
    seg.from = node_ref(s, "from", path + ".from");
    seg.to = node_ref(s, "to", path + ".to");
    seg.diameter_m = doc.number(s, "diameter_m", path + ".diameter_m", 0.0508);
    const std::string shape = doc.string(s, "shape", path + ".shape", std::string("straight"));
    if (shape == "straight") {
      seg.shape = net::SegmentShape::straight;
    } else if (shape == "arc") {
      seg.shape = net::SegmentShape::arc;
      seg.via = doc.vec3(doc.require(s, "via", path + ".via"), path + ".via");
    } else {
      throw doc.error(s["shape"], path + ".shape", "expected 'straight' or 'arc'");
    }
    try {
      scene.network.add_segment(std::move(seg));
    } catch (const DomainError& e) {
      throw doc.error(s, path, e.what());
    }
  }

  if (const YAML::Node junctions = root["junctions"]) {
    if (!junctions.IsSequence()) throw doc.error(junctions, "junctions", "must be a list");
    for (std::size_t i = 0; i < junctions.size(); ++i) {
      const std::string path = "junctions[" + std::to_string(i) + "]";
      const YAML::Node j = junctions[i];
      net::Junction junction;
      junction.node = node_ref(j, "node", path + ".node");
      const YAML::Node branches = doc.require(j, "branches", path + ".branches");
      if (!branches.IsSequence()) throw doc.error(branches, path + ".branches", "must be a list");
      for (std::size_t b = 0; b < branches.size(); ++b) {
        const std::string bpath = path + ".branches[" + std::to_string(b) + "]";
        net::JunctionBranch branch;
        branch.segment = segment_ref(branches[b], "segment", bpath + ".segment");
        branch.straight = doc.boolean(branches[b], "straight", bpath + ".straight", false);
        if (branches[b]["azimuth_deg"]) {
          branch.azimuth_deg = doc.number(branches[b], "azimuth_deg", bpath + ".azimuth_deg");
        }
        junction.branches.push_back(branch);
      }
      try {
        scene.network.add_junction(std::move(junction));
      } catch (const DomainError& e) {
        throw doc.error(j, path, e.what());
      }
    }
  }

  try {
    scene.network.validate();
  } catch (const DomainError& e) {
    throw LoadError(source, 0, "network", e.what());
  }

  if (const YAML::Node terminals = root["terminals"]) {
    if (!terminals.IsSequence()) throw doc.error(terminals, "terminals", "must be a list");
    for (std::size_t i = 0; i < terminals.size(); ++i) {
      const std::string path = "terminals[" + std::to_string(i) + "]";
      const YAML::Node t = terminals[i];
      const std::string id = doc.string(t, "id", path + ".id");
      const int entry = node_ref(t, "entry_node", path + ".entry_node");
      const Eigen::Vector3d lo = doc.vec3(doc.require(t, "min", path + ".min"), path + ".min");
      const Eigen::Vector3d hi = doc.vec3(doc.require(t, "max", path + ".max"), path + ".max");
      const int divisions = doc.integer(t, "panel_divisions", path + ".panel_divisions", 4);
      try {
        scene.terminals.push_back(make_terminal_box(id, entry, lo, hi, divisions));
      } catch (const DomainError& e) {
        throw doc.error(t, path, e.what());
      }
    }
  }

  if (const YAML::Node g = root["grid"]) {
    spray::TargetGrid grid;
    grid.name = doc.string(g, "name", "grid.name", std::string("target"));
    grid.rows = doc.integer(g, "rows", "grid.rows", 6);
    grid.cols = doc.integer(g, "cols", "grid.cols", 10);
    const double cell = doc.number(g, "cell_size_m", "grid.cell_size_m", 0.04);
    grid.cell_width_m = doc.number(g, "cell_width_m", "grid.cell_width_m", cell);
    grid.cell_height_m = doc.number(g, "cell_height_m", "grid.cell_height_m", cell);
    grid.origin = doc.vec3(doc.require(g, "origin", "grid.origin"), "grid.origin");
    grid.col_axis = unit_axis(doc, doc.require(g, "col_axis", "grid.col_axis"), "grid.col_axis");
    grid.row_axis = unit_axis(doc, doc.require(g, "row_axis", "grid.row_axis"), "grid.row_axis");
    try {
      grid.validate();
    } catch (const DomainError& e) {
      throw doc.error(g, "grid", e.what());
    }
    scene.grid = grid;
  }

  const YAML::Node robot = doc.require(root, "robot", "robot");
  scene.start.node = node_ref(robot, "start_node", "robot.start_node");
  scene.start.segment = segment_ref(robot, "start_segment", "robot.start_segment");
  scene.start.max_length_m = doc.number(robot, "max_length_m", "robot.max_length_m", 5.0);
  const auto& seg = scene.network.segment(scene.start.segment);
  if (seg.from != scene.start.node && seg.to != scene.start.node) {
    throw doc.error(robot, "robot.start_segment", "does not touch robot.start_node");
  }
  if (!(scene.start.max_length_m > 0.0)) {
    throw doc.error(robot, "robot.max_length_m", "must be > 0");
  }
  return scene;
}

Scene load_scene(const std::string& path) { return parse_scene(detail::read_text_file(path), path); }

}  // namespace eversim::scene
