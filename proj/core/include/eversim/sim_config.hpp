#pragma once

// Simulator configuration file (YAML, header `format: eversim-config/1`).
// Every key is optional; omitted keys keep the defaults below.
//
//   format: eversim-config/1
//   dt_s: 0.01
//   telemetry_hz: 20
//   regulator_tau_s: 0.5
//   max_pressure_kpa: 150
//   growth: {rate_coeff: 0.02, threshold_kpa: 10}
//   junction_deadband_deg: 15
//   camera_fov_deg: 60
//   tip: {disc_count: 6, disc_spacing_m: 0.02, disc_diameter_m: 0.045,
//         tendon_pitch_radius_m: 0.00923, max_bend_deg: 90}
//   spool_radius_m: 0.0125
//   servo: {name: DM-S0090MD, operating_angle_deg: 270, torque_4v8_kgcm: 1.8, torque_6v_kgcm: 2.0}
//   spray: {cone_half_angle_deg: 10, range_m: 1.0}
//   payloads:
//     - {id: sprayer, flow: aerosol_paint}
//     - {id: sensor}            # no flow: spraying does nothing
//   default_payload: sprayer
//   noise: {aim_sigma_deg: 0, actuation_sigma_mm: 0}

#include <optional>
#include <string>
#include <vector>

#include "eversim/eversion.hpp"
#include "eversim/mech_calc.hpp"
#include "eversim/protocol.hpp"
#include "eversim/spray.hpp"
#include "eversim/tip_kinematics.hpp"

namespace eversim::sim {

struct Payload {
  std::string id;
  std::optional<spray::Flow> flow;  // nullopt: non-spraying payload
};

struct SimConfig {
  double dt_s = 0.01;
  double telemetry_hz = 20.0;
  double regulator_tau_s = 0.5;
  double max_pressure_kpa = 150.0;
  eversion::GrowthParams growth;
  double junction_deadband_deg = 15.0;
  double camera_fov_deg = 60.0;
  tip::TipGeometry geometry;
  mech::SpoolSpec spool;
  mech::ServoSpec servo{"DM-S0090MD", 270.0, 1.8, 2.0};
  spray::SpraySpec spray;
  std::vector<Payload> payloads{{"sprayer", spray::Flow::aerosol_paint},
                                {"water_nozzle", spray::Flow::water},
                                {"foam_nozzle", spray::Flow::foam},
                                {"sensor", std::nullopt}};
  std::string default_payload = "sprayer";
  proto::NoiseSettings noise;
  // Exact file text, used for session hashing; empty for built-in defaults.
  std::string source_text;

  // Throws DomainError on inconsistent values.
  void validate() const;
  int ticks_per_frame() const;
  const Payload* find_payload(const std::string& id) const;
};

SimConfig parse_sim_config(const std::string& text, const std::string& source = {});
SimConfig load_sim_config(const std::string& path);

}  // namespace eversim::sim
