#include "eversim/sim_config.hpp"

#include <algorithm>
#include <cmath>

#include "eversim/error.hpp"
#include "yaml_util.hpp"

namespace eversim::sim {

void SimConfig::validate() const {
  if (!(dt_s > 0.0)) throw DomainError("dt_s must be > 0");
  if (!(telemetry_hz > 0.0)) throw DomainError("telemetry_hz must be > 0");
  if (!(regulator_tau_s > 0.0)) throw DomainError("regulator_tau_s must be > 0");
  if (!(max_pressure_kpa > 0.0)) throw DomainError("max_pressure_kpa must be > 0");
  if (!(growth.rate_coeff_m_per_s_kpa >= 0.0)) throw DomainError("growth.rate_coeff must be >= 0");
  if (!(growth.threshold_kpa >= 0.0)) throw DomainError("growth.threshold_kpa must be >= 0");
  if (!(junction_deadband_deg >= 0.0)) throw DomainError("junction_deadband_deg must be >= 0");
  if (!(camera_fov_deg > 0.0 && camera_fov_deg < 180.0)) throw DomainError("camera_fov_deg must be in (0, 180)");
  if (!(noise.aim_sigma_deg >= 0.0) || !(noise.actuation_sigma_mm >= 0.0)) {
    throw DomainError("noise sigmas must be >= 0");
  }
  geometry.validate();
  spool.validate();
  servo.validate();
  spray.validate();
  if (payloads.empty()) throw DomainError("at least one payload is required");
  if (find_payload(default_payload) == nullptr) throw DomainError("default_payload is not in payloads");
  const double ratio = 1.0 / (telemetry_hz * dt_s);
  if (ratio < 1.0 - 1e-9) throw DomainError("telemetry_hz exceeds the tick rate");
}

int SimConfig::ticks_per_frame() const {
  return std::max(1, static_cast<int>(std::lround(1.0 / (telemetry_hz * dt_s))));
}

const Payload* SimConfig::find_payload(const std::string& id) const {
  for (const auto& p : payloads) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

SimConfig parse_sim_config(const std::string& text, const std::string& source) {
  detail::YamlDoc doc(text, source);
  doc.expect_format("eversim-config", 1);
  const YAML::Node& root = doc.root();
  SimConfig c;
  c.source_text = text;
  c.dt_s = doc.number(root, "dt_s", "dt_s", c.dt_s);
  c.telemetry_hz = doc.number(root, "telemetry_hz", "telemetry_hz", c.telemetry_hz);
  c.regulator_tau_s = doc.number(root, "regulator_tau_s", "regulator_tau_s", c.regulator_tau_s);
  c.max_pressure_kpa = doc.number(root, "max_pressure_kpa", "max_pressure_kpa", c.max_pressure_kpa);
  c.junction_deadband_deg = doc.number(root, "junction_deadband_deg", "junction_deadband_deg", c.junction_deadband_deg);
  c.camera_fov_deg = doc.number(root, "camera_fov_deg", "camera_fov_deg", c.camera_fov_deg);
  if (const YAML::Node g = root["growth"]) {
    c.growth.rate_coeff_m_per_s_kpa = doc.number(g, "rate_coeff", "growth.rate_coeff", c.growth.rate_coeff_m_per_s_kpa);
    c.growth.threshold_kpa = doc.number(g, "threshold_kpa", "growth.threshold_kpa", c.growth.threshold_kpa);
  }
  if (const YAML::Node t = root["tip"]) {
    c.geometry.disc_count = doc.integer(t, "disc_count", "tip.disc_count", c.geometry.disc_count);
    c.geometry.disc_spacing_m = doc.number(t, "disc_spacing_m", "tip.disc_spacing_m", c.geometry.disc_spacing_m);
    c.geometry.disc_diameter_m = doc.number(t, "disc_diameter_m", "tip.disc_diameter_m", c.geometry.disc_diameter_m);
    c.geometry.tendon_pitch_radius_m =
        doc.number(t, "tendon_pitch_radius_m", "tip.tendon_pitch_radius_m", c.geometry.tendon_pitch_radius_m);
    c.geometry.max_bend_deg = doc.number(t, "max_bend_deg", "tip.max_bend_deg", c.geometry.max_bend_deg);
  }
  c.spool.radius_m = doc.number(root, "spool_radius_m", "spool_radius_m", c.spool.radius_m);
  if (const YAML::Node s = root["servo"]) {
    c.servo.name = doc.string(s, "name", "servo.name", c.servo.name);
    c.servo.operating_angle_deg =
        doc.number(s, "operating_angle_deg", "servo.operating_angle_deg", c.servo.operating_angle_deg);
    c.servo.torque_4v8_kgcm = doc.number(s, "torque_4v8_kgcm", "servo.torque_4v8_kgcm", c.servo.torque_4v8_kgcm);
    c.servo.torque_6v_kgcm = doc.number(s, "torque_6v_kgcm", "servo.torque_6v_kgcm", c.servo.torque_6v_kgcm);
  }
  if (const YAML::Node s = root["spray"]) {
    c.spray.cone_half_angle_deg =
        doc.number(s, "cone_half_angle_deg", "spray.cone_half_angle_deg", c.spray.cone_half_angle_deg);
    c.spray.range_m = doc.number(s, "range_m", "spray.range_m", c.spray.range_m);
    if (s["flow"]) {
      try {
        c.spray.flow = spray::parse_flow(doc.as<std::string>(s["flow"], "spray.flow"));
      } catch (const InputError& e) {
        throw doc.error(s["flow"], "spray.flow", e.what());
      }
    }
  }
  if (const YAML::Node p = root["payloads"]) {
    if (!p.IsSequence()) throw doc.error(p, "payloads", "must be a list");
    c.payloads.clear();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string path = "payloads[" + std::to_string(i) + "]";
      Payload payload;
      payload.id = doc.string(p[i], "id", path + ".id");
      if (p[i]["flow"]) {
        try {
          payload.flow = spray::parse_flow(doc.as<std::string>(p[i]["flow"], path + ".flow"));
        } catch (const InputError& e) {
          throw doc.error(p[i]["flow"], path + ".flow", e.what());
        }
      }
      c.payloads.push_back(payload);
    }
  }
  c.default_payload = doc.string(root, "default_payload", "default_payload", c.default_payload);
  if (const YAML::Node n = root["noise"]) {
    c.noise.aim_sigma_deg = doc.number(n, "aim_sigma_deg", "noise.aim_sigma_deg", c.noise.aim_sigma_deg);
    c.noise.actuation_sigma_mm =
        doc.number(n, "actuation_sigma_mm", "noise.actuation_sigma_mm", c.noise.actuation_sigma_mm);
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw LoadError(source, 0, "config", e.what());
  }
  return c;
}

SimConfig load_sim_config(const std::string& path) { return parse_sim_config(detail::read_text_file(path), path); }

}  // namespace eversim::sim
