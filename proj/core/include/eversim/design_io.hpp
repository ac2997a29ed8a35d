#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eversim/mech_calc.hpp"

namespace eversim::mech {

// Servo catalog: comma-separated text mirroring the comparison table.
//
//   # comments and blank lines are ignored
//   name,operating_angle_deg,torque_4v8_kgcm,torque_6v_kgcm
//   SG90,180,1.2,1.6
//
// The header row is required. Throws LoadError with the line number.
std::vector<ServoSpec> parse_servo_catalog(std::istream& in, const std::string& source = {});
std::vector<ServoSpec> load_servo_catalog(const std::string& path);
void write_servo_catalog(std::ostream& out, const std::vector<ServoSpec>& catalog);

// Tip design file (YAML, header `format: eversim-design/1`). Missing keys keep
// the TipDesign defaults.
TipDesign parse_tip_design(const std::string& text, const std::string& source = {});
TipDesign load_tip_design(const std::string& path);

struct DesignCheck {
  TipDesign design;
  double shear_modulus_pa = 0.0;
  double spring_constant_n_per_m = 0.0;
  double per_spring_force_n = 0.0;
  ActuationRequirement requirement;
  FeasibilityReport report;
};

DesignCheck run_design_check(const TipDesign& design, const std::vector<ServoSpec>& catalog);

// Human-readable table; one row per servo.
std::string format_design_check(const DesignCheck& check);
// Same content as a JSON document.
std::string design_check_json(const DesignCheck& check);

}  // namespace eversim::mech
