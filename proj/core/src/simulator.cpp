#include "eversim/simulator.hpp"

#include <cmath>
#include <limits>

#include "eversim/units.hpp"

namespace eversim::sim {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double NoiseSource::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double NoiseSource::gaussian(double sigma) {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z * sigma;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * kPi * u2;
  spare_ = r * std::sin(t);
  return r * std::cos(t) * sigma;
}

Simulator::Simulator(std::shared_ptr<const scene::Scene> scene, SimConfig config, std::uint64_t seed)
    : scene_(std::move(scene)), config_(std::move(config)), noise_(seed) {
  if (!scene_) throw InputError("simulator needs a scene");
  config_.validate();
  path_ = eversion::start_path(scene_->network, scene_->start.node, scene_->start.segment);
  state_.max_length_m = scene_->start.max_length_m;
  payload_ = config_.default_payload;
  commanded_ = tip::solve_state({}, config_.geometry, config_.spool, config_.servo);
  if (scene_->grid) grid_coverage_.emplace(scene_->grid->cell_count());
  for (const auto& box : scene_->terminals) {
    std::vector<spray::CoverageMap> walls;
    for (const auto& w : box.walls) walls.emplace_back(w.cell_count());
    wall_coverage_.push_back(std::move(walls));
  }
}

void Simulator::emit(std::string event, std::string detail, std::vector<int> cells) {
  events_.push_back({tick_, sim_time_s(), std::move(event), std::move(detail), std::move(cells)});
}

std::vector<proto::EventRecord> Simulator::take_events() {
  std::vector<proto::EventRecord> out;
  out.swap(events_);
  return out;
}

void Simulator::set_bend(const tip::BendCommand& bend) {
  commanded_ = tip::solve_state(bend, config_.geometry, config_.spool, config_.servo);
  actual_bend_ = commanded_.bend;
  if (config_.noise.actuation_sigma_mm > 0.0) {
    tip::TendonDisplacements d = commanded_.tendon_displacements_m;
    for (double& v : d) v = std::max(0.0, v + noise_.gaussian(config_.noise.actuation_sigma_mm * 1e-3));
    actual_bend_ = tip::sanitize(tip::bend_from_displacements(d, config_.geometry), config_.geometry);
  }
  if (config_.noise.aim_sigma_deg > 0.0) {
    aim_offset_a_rad_ = deg_to_rad(noise_.gaussian(config_.noise.aim_sigma_deg));
    aim_offset_b_rad_ = deg_to_rad(noise_.gaussian(config_.noise.aim_sigma_deg));
  }
}

void Simulator::apply(const proto::CommandKind& command) {
  std::visit(
      overloaded{
          [&](const proto::Joystick& j) {
            if (!(j.x >= -1.0 && j.x <= 1.0)) throw CommandRejected("x", "must be in [-1, 1]");
            if (!(j.y >= -1.0 && j.y <= 1.0)) throw CommandRejected("y", "must be in [-1, 1]");
            set_bend(tip::joystick_to_bend(j.x, j.y, config_.geometry));
          },
          [&](const proto::SetPressure& p) {
            if (estopped_) throw CommandRejected("kind", "estop active; send resume first");
            if (!(p.kpa >= 0.0 && p.kpa <= config_.max_pressure_kpa)) {
              throw CommandRejected("kpa", "must be in [0, " + std::to_string(config_.max_pressure_kpa) + "]");
            }
            state_.target_pressure_kpa = p.kpa;
          },
          [&](const proto::Spray& s) {
            if (s.on && estopped_) throw CommandRejected("kind", "estop active; send resume first");
            spray_on_ = s.on;
          },
          [&](const proto::Retract& r) {
            eversion::RetractResult res;
            try {
              res = eversion::retract(path_, state_, r.length_m);
            } catch (const InputError& e) {
              throw CommandRejected("length_m", e.what());
            }
            path_ = std::move(res.path);
            state_ = std::move(res.state);
            emit("retract", std::to_string(r.length_m));
          },
          [&](const proto::Estop&) {
            estopped_ = true;
            spray_on_ = false;
            state_.target_pressure_kpa = 0.0;
            state_.status = eversion::GrowthStatus::holding;
            emit("estop", "");
          },
          [&](const proto::Resume&) {
            estopped_ = false;
            emit("resume", "");
          },
          [&](const proto::SelectPayload& p) {
            if (config_.find_payload(p.id) == nullptr) throw CommandRejected("id", "unknown payload '" + p.id + "'");
            payload_ = p.id;
            emit("payload", p.id);
          },
      },
      command);
}

void Simulator::tick() {
  const auto& net = scene_->network;
  const auto before = state_.status;
  state_ = eversion::pressure_step(state_, config_.dt_s, config_.regulator_tau_s);

  if (estopped_) {
    state_.status = eversion::GrowthStatus::holding;
  } else {
    const auto sampler = [&](double s) { return eversion::position_at(path_, net, s); };
    const double demand = eversion::growth_demand(state_, config_.dt_s, config_.growth);
    double available = std::numeric_limits<double>::infinity();
    std::string block_reason = "maximum everted length reached";
    if (demand > 0.0) {
      const auto adv =
          eversion::advance_along_network(path_, net, demand, actual_bend_, config_.junction_deadband_deg);
      path_ = adv.path;
      for (const auto& j : adv.junctions) {
        emit("junction", "node " + net.node(j.node).id + " -> segment " + net.segment(j.chosen_segment).id +
                             (j.straight_through ? " (straight)" : ""));
      }
      if (adv.blocked) {
        available = adv.advanced_m;
        block_reason = adv.block_reason;
      }
    }
    state_ = eversion::growth_step(state_, config_.dt_s, config_.growth, available, sampler);
    if (state_.status == eversion::GrowthStatus::blocked && before != eversion::GrowthStatus::blocked) {
      emit("blocked", block_reason);
    }
  }
  ++tick_;
  if (state_.status != before) emit("status", eversion::to_string(state_.status));
  if (spray_on_) spray_tick();
}

Eigen::Isometry3d Simulator::base_frame() const { return eversion::tip_base_frame(path_, scene_->network); }

tip::TipPose Simulator::tip_pose() const { return tip::forward_tip_pose(actual_bend_, config_.geometry, base_frame()); }

tip::TipPose Simulator::spray_pose() const {
  tip::TipPose pose = tip_pose();
  if (aim_offset_a_rad_ == 0.0 && aim_offset_b_rad_ == 0.0) return pose;
  const Eigen::Isometry3d base = base_frame();
  const Eigen::Vector3d h = pose.heading;
  Eigen::Vector3d ref = base.linear().col(1);
  if (h.cross(ref).norm() < 1e-6) ref = base.linear().col(0);
  const Eigen::Vector3d u1 = (ref - ref.dot(h) * h).normalized();
  const Eigen::Vector3d u2 = h.cross(u1);
  pose.heading = (h + std::tan(aim_offset_a_rad_) * u1 + std::tan(aim_offset_b_rad_) * u2).normalized();
  return pose;
}

void Simulator::spray_tick() {
  const Payload* payload = config_.find_payload(payload_);
  if (payload == nullptr || !payload->flow) return;
  const tip::TipPose pose = spray_pose();
  if (scene_->grid) {
    const auto fresh = grid_coverage_->mark(spray::spray_hits(pose, config_.spray, *scene_->grid));
    if (!fresh.empty()) emit("cells_hit", scene_->grid->name, fresh);
  }
  for (std::size_t t = 0; t < scene_->terminals.size(); ++t) {
    const auto& box = scene_->terminals[t];
    for (std::size_t w = 0; w < box.walls.size(); ++w) {
      const auto fresh = wall_coverage_[t][w].mark(spray::spray_hits(pose, config_.spray, box.walls[w]));
      if (!fresh.empty()) emit("wall_hit", box.id + "/" + box.walls[w].name, fresh);
    }
  }
}

tip::BendCommand Simulator::aim_bend(const Eigen::Vector3d& target) const {
  return tip::aim_at(target, config_.geometry, base_frame());
}

proto::TelemetryFrame Simulator::telemetry() const {
  proto::TelemetryFrame f;
  f.seq = tick_ / config_.ticks_per_frame();
  f.tick = tick_;
  f.sim_time_s = sim_time_s();
  f.everted_length_m = state_.everted_length_m;
  f.pressure_kpa = state_.pressure_kpa;
  f.target_pressure_kpa = state_.target_pressure_kpa;
  const tip::TipPose pose = tip_pose();
  f.tip_position = {pose.position.x(), pose.position.y(), pose.position.z()};
  f.tip_heading = {pose.heading.x(), pose.heading.y(), pose.heading.z()};
  f.bend_magnitude_deg = commanded_.bend.magnitude_deg;
  f.bend_direction_deg = commanded_.bend.direction_deg;
  f.servo_angles_deg = commanded_.servo.angles_deg;
  f.status = eversion::to_string(state_.status);
  f.estopped = estopped_;
  f.spray_on = spray_on_;
  f.payload = payload_;
  f.segment = scene_->network.segment(path_.current().segment).id;

  if (scene_->grid && grid_coverage_) {
    const auto& grid = *scene_->grid;
    f.coverage = proto::CoverageSnapshot{grid_coverage_->hit_count(), grid.cell_count(),
                                         100.0 * grid_coverage_->hit_count() / grid.cell_count()};
    proto::PovView pov;
    pov.rows = grid.rows;
    pov.cols = grid.cols;
    pov.hits = grid_coverage_->bitstring();
    const Eigen::Vector3d fwd = pose.heading;
    Eigen::Vector3d up_ref = base_frame().linear().col(1);
    if (fwd.cross(up_ref).norm() < 1e-6) up_ref = base_frame().linear().col(0);
    const Eigen::Vector3d right = fwd.cross(up_ref).normalized();
    const Eigen::Vector3d up = right.cross(fwd);
    const double half = std::tan(deg_to_rad(config_.camera_fov_deg) / 2.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const Eigen::Vector3d p = grid.cell_center(i) - pose.position;
      const double depth = p.dot(fwd);
      if (depth <= 1e-9) {
        pov.visible.push_back('0');
        pov.uv.push_back(0.0);
        pov.uv.push_back(0.0);
        continue;
      }
      const double u = p.dot(right) / (depth * half);
      const double v = p.dot(up) / (depth * half);
      pov.visible.push_back(std::fabs(u) <= 1.0 && std::fabs(v) <= 1.0 ? '1' : '0');
      pov.uv.push_back(u);
      pov.uv.push_back(v);
    }
    f.pov = std::move(pov);
  }
  return f;
}

}  // namespace eversim::sim
