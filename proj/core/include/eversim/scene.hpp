#pragma once

// Scene files describe the environment: the pipe network, terminal vessels
// (glove boxes) with sprayable walls, an optional target grid, and where the
// robot starts. Format: YAML with header `format: eversim-scene/1`.
//
//   format: eversim-scene/1
//   name: tee-to-glovebox
//   nodes:
//     - {id: inlet, position: [0, 0, 0]}
//     - {id: tee, position: [1, 0, 0]}
//   segments:
//     - {id: main, from: inlet, to: tee, diameter_m: 0.0508}
//     - {id: bend, from: tee, to: box, diameter_m: 0.0508, shape: arc, via: [..]}
//   junctions:
//     - node: tee
//       branches:
//         - {segment: left, azimuth_deg: 0}
//         - {segment: ahead, straight: true}
//   terminals:
//     - {id: glovebox, entry_node: box, min: [..], max: [..], panel_divisions: 4}
//   grid: {origin: [..], col_axis: [..], row_axis: [..], rows: 6, cols: 10, cell_size_m: 0.04}
//   robot: {start_node: inlet, start_segment: main, max_length_m: 5.0}

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "eversim/pipe_network.hpp"
#include "eversim/spray.hpp"

namespace eversim::scene {

inline constexpr std::array<const char*, 6> kWallNames = {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};

struct TerminalBox {
  std::string id;
  int entry_node = -1;
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();
  int panel_divisions = 4;
  // One panel grid per wall in kWallNames order, front faces pointing inwards.
  std::vector<spray::TargetGrid> walls;

  bool contains(const Eigen::Vector3d& p) const;
  std::optional<int> wall_index(const std::string& name) const;
};

TerminalBox make_terminal_box(std::string id, int entry_node, const Eigen::Vector3d& min, const Eigen::Vector3d& max,
                              int panel_divisions);

struct RobotStart {
  int node = 0;
  int segment = 0;
  double max_length_m = 5.0;
};

struct Scene {
  std::string name;
  net::PipeNetwork network;
  std::vector<TerminalBox> terminals;
  std::optional<spray::TargetGrid> grid;
  RobotStart start;
  // Exact file text, used for session hashing.
  std::string source_text;
};

Scene parse_scene(const std::string& text, const std::string& source = {});
Scene load_scene(const std::string& path);

}  // namespace eversim::scene
