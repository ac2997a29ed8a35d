#pragma once

// Fixed-tick simulation of the whole robot in a scene.
//
// The simulator is a single-writer state machine: commands are applied with
// apply() strictly between calls to tick(), so no telemetry frame ever sees a
// half-applied command. Given the same scene, config, seed and command
// schedule it produces bit-identical frames.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eversim/error.hpp"
#include "eversim/eversion.hpp"
#include "eversim/protocol.hpp"
#include "eversim/scene.hpp"
#include "eversim/sim_config.hpp"
#include "eversim/spray.hpp"
#include "eversim/tip_kinematics.hpp"

namespace eversim::sim {

// A command the simulator refused. `field` names the offending input.
class CommandRejected : public InputError {
 public:
  CommandRejected(std::string field, const std::string& message)
      : InputError(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Seeded Gaussian source with a fully specified algorithm (mt19937_64 +
// Box-Muller) so noisy runs replay identically across standard libraries.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double gaussian(double sigma);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

class Simulator {
 public:
  Simulator(std::shared_ptr<const scene::Scene> scene, SimConfig config, std::uint64_t seed);

  // Throws CommandRejected; state is untouched when it does.
  void apply(const proto::CommandKind& command);
  void tick();

  std::int64_t tick_index() const noexcept { return tick_; }
  double sim_time_s() const noexcept { return static_cast<double>(tick_) * config_.dt_s; }
  bool telemetry_due() const noexcept { return tick_ % config_.ticks_per_frame() == 0; }
  proto::TelemetryFrame telemetry() const;

  // Events raised since the last call, oldest first.
  std::vector<proto::EventRecord> take_events();

  const scene::Scene& scene() const noexcept { return *scene_; }
  const SimConfig& config() const noexcept { return config_; }
  const eversion::EversionState& eversion() const noexcept { return state_; }
  const eversion::RobotPath& path() const noexcept { return path_; }
  const tip::ContinuumState& continuum() const noexcept { return commanded_; }
  const tip::BendCommand& actual_bend() const noexcept { return actual_bend_; }
  tip::TipPose tip_pose() const;
  // Heading the spray actually leaves along (tip heading plus aim noise).
  tip::TipPose spray_pose() const;
  Eigen::Isometry3d base_frame() const;
  bool estopped() const noexcept { return estopped_; }
  bool spray_on() const noexcept { return spray_on_; }
  const std::string& payload() const noexcept { return payload_; }
  const spray::CoverageMap* grid_coverage() const noexcept { return grid_coverage_ ? &*grid_coverage_ : nullptr; }
  // Indexed [terminal][wall], walls in scene::kWallNames order.
  const std::vector<std::vector<spray::CoverageMap>>& wall_coverage() const noexcept { return wall_coverage_; }

  // Bend that aims the tip at a world point from the current base frame.
  tip::BendCommand aim_bend(const Eigen::Vector3d& target) const;

 private:
  void emit(std::string event, std::string detail, std::vector<int> cells = {});
  void set_bend(const tip::BendCommand& bend);
  void spray_tick();

  std::shared_ptr<const scene::Scene> scene_;
  SimConfig config_;
  NoiseSource noise_;
  std::int64_t tick_ = 0;

  eversion::EversionState state_;
  eversion::RobotPath path_;
  tip::ContinuumState commanded_;
  tip::BendCommand actual_bend_;
  double aim_offset_a_rad_ = 0.0;
  double aim_offset_b_rad_ = 0.0;
  bool estopped_ = false;
  bool spray_on_ = false;
  std::string payload_;

  std::optional<spray::CoverageMap> grid_coverage_;
  std::vector<std::vector<spray::CoverageMap>> wall_coverage_;
  std::vector<proto::EventRecord> events_;
};

}  // namespace eversim::sim
