#include "eversim/mech_calc.hpp"

#include <algorithm>
#include <cmath>

#include "eversim/error.hpp"
#include "eversim/units.hpp"

namespace eversim::mech {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void SpringSpec::validate() const {
  require(finite(young_modulus_pa) && young_modulus_pa > 0.0, "spring young_modulus must be > 0");
  require(finite(poisson_ratio) && poisson_ratio >= 0.0 && poisson_ratio < 0.5,
          "spring poisson_ratio must be in [0, 0.5)");
  require(finite(wire_diameter_m) && wire_diameter_m > 0.0, "spring wire_diameter must be > 0");
  require(finite(outer_diameter_m) && outer_diameter_m > 0.0, "spring outer_diameter must be > 0");
  require(finite(free_length_m) && free_length_m > 0.0, "spring free_length must be > 0");
  require(active_coils >= 1, "spring active_coils must be >= 1");
  require(wire_diameter_m < outer_diameter_m, "spring wire_diameter must be below outer_diameter");
}

void ServoSpec::validate() const {
  require(!name.empty(), "servo name is empty");
  require(finite(operating_angle_deg) && operating_angle_deg > 0.0 && operating_angle_deg <= 360.0,
          "servo " + name + ": operating_angle must be in (0, 360]");
  require(finite(torque_4v8_kgcm) && torque_4v8_kgcm >= 0.0, "servo " + name + ": torque_4v8 must be >= 0");
  require(finite(torque_6v_kgcm) && torque_6v_kgcm >= 0.0, "servo " + name + ": torque_6v must be >= 0");
}

void SpoolSpec::validate() const { require(finite(radius_m) && radius_m > 0.0, "spool radius must be > 0"); }

void ActuationRequirement::validate() const {
  require(finite(total_force_n) && total_force_n >= 0.0, "total_force must be >= 0");
  require(finite(required_displacement_m) && required_displacement_m >= 0.0,
          "required_displacement must be >= 0");
}

double shear_modulus(double young_modulus_pa, double poisson_ratio) {
  require(finite(young_modulus_pa) && young_modulus_pa > 0.0, "young_modulus must be > 0");
  require(finite(poisson_ratio) && poisson_ratio >= 0.0 && poisson_ratio < 0.5,
          "poisson_ratio must be in [0, 0.5)");
  return young_modulus_pa / (2.0 * (1.0 + poisson_ratio));
}

double spring_constant(double shear_modulus_pa, double wire_diameter_m, double mean_coil_diameter_m,
                       int active_coils) {
  require(finite(shear_modulus_pa) && shear_modulus_pa > 0.0, "shear_modulus must be > 0");
  require(finite(wire_diameter_m) && wire_diameter_m > 0.0, "wire_diameter must be > 0");
  require(finite(mean_coil_diameter_m) && mean_coil_diameter_m > 0.0, "mean_coil_diameter must be > 0");
  require(active_coils >= 1, "active_coils must be >= 1");
  const double d2 = wire_diameter_m * wire_diameter_m;
  const double big_d3 = mean_coil_diameter_m * mean_coil_diameter_m * mean_coil_diameter_m;
  return shear_modulus_pa * d2 * d2 / (8.0 * active_coils * big_d3);
}

double spring_constant(const SpringSpec& spec) {
  spec.validate();
  return spring_constant(shear_modulus(spec.young_modulus_pa, spec.poisson_ratio), spec.wire_diameter_m,
                         spec.mean_coil_diameter_m(), spec.active_coils);
}

double spring_force(double stiffness_n_per_m, double displacement_m) {
  return std::fabs(stiffness_n_per_m * displacement_m);
}

double required_torque(const ActuationRequirement& req, const SpoolSpec& spool) {
  req.validate();
  spool.validate();
  return req.total_force_n * spool.radius_m;
}

double stall_torque_si(double torque_kg_cm) { return torque_kg_cm * 0.01 * kGravity; }

double spool_travel(const SpoolSpec& spool, double operating_angle_deg) {
  spool.validate();
  return operating_angle_deg / 360.0 * 2.0 * kPi * spool.radius_m;
}

double rated_torque_kgcm(const ServoSpec& servo, Supply supply) noexcept {
  return supply == Supply::V6 ? servo.torque_6v_kgcm : servo.torque_4v8_kgcm;
}

FeasibilityReport servo_feasibility(std::span<const ServoSpec> catalog, const ActuationRequirement& req,
                                    const SpoolSpec& spool, Supply supply) {
  if (catalog.empty()) throw InputError("servo catalog is empty");

  FeasibilityReport report;
  report.supply = supply;
  report.required_torque_nm = required_torque(req, spool);
  report.required_displacement_m = req.required_displacement_m;
  report.servos.reserve(catalog.size());

  const ServoSpec* best = nullptr;
  for (const ServoSpec& servo : catalog) {
    servo.validate();
    ServoAssessment a;
    a.name = servo.name;
    a.operating_angle_deg = servo.operating_angle_deg;
    a.stall_torque_nm = stall_torque_si(rated_torque_kgcm(servo, supply));
    a.spool_travel_m = spool_travel(spool, servo.operating_angle_deg);
    a.torque_ok = a.stall_torque_nm >= report.required_torque_nm;
    a.travel_ok = a.spool_travel_m >= req.required_displacement_m;
    report.servos.push_back(a);

    if (!a.feasible()) continue;
    if (best == nullptr || servo.operating_angle_deg > best->operating_angle_deg ||
        (servo.operating_angle_deg == best->operating_angle_deg &&
         rated_torque_kgcm(servo, supply) > rated_torque_kgcm(*best, supply))) {
      best = &servo;
    }
  }
  if (best != nullptr) report.selected = best->name;
  return report;
}

ActuationRequirement actuation_requirement(const TipDesign& design) {
  if (design.joint_count < 1) throw DomainError("joint_count must be >= 1");
  if (!(design.design_compression_m >= 0.0)) throw DomainError("design_compression must be >= 0");
  const double per_spring = spring_force(spring_constant(design.spring), design.design_compression_m);
  ActuationRequirement req{per_spring * design.joint_count, design.required_displacement_m};
  req.validate();
  return req;
}

std::vector<ServoSpec> reference_servo_catalog() {
  return {
      {"SG90", 180.0, 1.2, 1.6},
      {"MG90s", 180.0, 1.8, 2.2},
      {"DMS-MG90-A", 270.0, 1.3, 1.5},
      {"DS-S006L", 300.0, 1.0, 1.2},
      {"DM-S0090MD", 270.0, 1.8, 2.0},
  };
}

const char* to_string(Supply supply) noexcept { return supply == Supply::V6 ? "6V" : "4.8V"; }

Supply parse_supply(const std::string& text) {
  if (text == "6V" || text == "6" || text == "6v" || text == "6.0V") return Supply::V6;
  if (text == "4.8V" || text == "4.8" || text == "4.8v") return Supply::V4_8;
  throw InputError("unknown supply voltage '" + text + "' (expected 4.8V or 6V)");
}

}  // namespace eversim::mech
