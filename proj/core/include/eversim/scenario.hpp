#pragma once

// Scripted experiment runs. Script format: YAML, header `format: eversim-script/1`.
//
//   format: eversim-script/1
//   name: grid-raster
//   scenario: spray_grid            # target_spray | spray_grid | wall_coverage
//   scene: ../scenes/grid_box.yaml  # relative to the script file
//   config: ../config/default.yaml  # optional; built-in defaults otherwise
//   seed: 1                         # overridable from the command line
//   noise: {aim_sigma_deg: 3, actuation_sigma_mm: 0}   # optional; replaces config noise
//   stop: {max_time_s: 60, on_success: true}
//   commands:                       # t in seconds, non-decreasing
//     - {t: 0.0, set_pressure: 40}
//     - {t: 2.0, joystick: [0.5, 0.0]}
//     - {t: 4.0, aim_cell: [2, 3]}  # aim at a grid cell centre
//     - {t: 4.0, aim_point: [1.2, 0.0, 0.1]}
//     - {t: 4.2, spray: true}
//     - {t: 9.0, retract: 0.1}
//     - {t: 9.5, select_payload: foam_nozzle}
//     - {t: 9.9, estop: true}
//     - {t: 10.0, resume: true}
//   raster: {start_s: 5, settle_s: 0.1, dwell_s: 0.2, order: serpentine}   # every grid cell
//   sweep: {start_s: 5, settle_s: 0.1, dwell_s: 0.2, magnitudes: [0, 0.5, 1], directions: 12}
//   targets: [[2, 3]]               # target_spray: cells that must be hit
//   terminal: glovebox              # wall_coverage: defaults to the first terminal
//   wall_fraction: 0.75             # wall_coverage: per-wall panel fraction
//
// aim_cell / aim_point resolve to a joystick command when applied, from the
// tip base frame at that moment, and are recorded as that joystick command.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "eversim/protocol.hpp"
#include "eversim/session.hpp"
#include "eversim/spray.hpp"

namespace eversim::scenario {

enum class ScenarioType { target_spray, spray_grid, wall_coverage };

const char* to_string(ScenarioType type) noexcept;
ScenarioType parse_scenario_type(const std::string& text);

struct AimCell {
  int row = 0;
  int col = 0;
};
struct AimPoint {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

using ScriptAction = std::variant<proto::CommandKind, AimCell, AimPoint>;

struct TimedAction {
  double t_s = 0.0;
  ScriptAction action;
};

struct RasterSpec {
  double start_s = 0.0;
  double settle_s = 0.1;
  double dwell_s = 0.2;
  bool serpentine = true;
};

struct SweepSpec {
  double start_s = 0.0;
  double settle_s = 0.1;
  double dwell_s = 0.2;
  std::vector<double> magnitudes{0.0, 0.5, 1.0};
  int directions = 12;
};

struct ScenarioScript {
  std::string name;
  ScenarioType type = ScenarioType::spray_grid;
  std::string scene_path;   // as written in the script
  std::string config_path;  // as written; empty for defaults
  std::string base_dir;     // directory the paths are relative to
  std::uint64_t seed = 0;
  std::optional<proto::NoiseSettings> noise;
  double max_time_s = 60.0;
  bool stop_on_success = true;
  std::vector<TimedAction> commands;
  std::optional<RasterSpec> raster;
  std::optional<SweepSpec> sweep;
  std::vector<AimCell> targets;
  std::string terminal;
  double wall_fraction = 1.0;
  std::string source_path;
};

ScenarioScript parse_script(const std::string& text, const std::string& source = {});
ScenarioScript load_script(const std::string& path);

// Explicit commands merged with generated raster/sweep commands, ordered by
// time; ties keep explicit commands first, then generation order.
std::vector<TimedAction> expand_schedule(const ScenarioScript& script, int grid_rows, int grid_cols);

struct RunRecord {
  session::SessionLog log;
  bool success = false;
  std::optional<std::int64_t> success_tick;
  // Present when the scene has a grid: one row, this run.
  std::optional<spray::CoverageReport> coverage;
  int grid_hits = 0;
  int grid_cells = 0;
  std::vector<double> wall_fractions;  // terminal walls in kWallNames order
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the script seed
  std::optional<proto::NoiseSettings> noise;  // overrides script and config noise
};

// Deterministic given the script, files and seed. Scene/config schema errors
// surface as LoadError.
RunRecord run_scenario(const ScenarioScript& script, const RunOptions& options = {});

}  // namespace eversim::scenario
