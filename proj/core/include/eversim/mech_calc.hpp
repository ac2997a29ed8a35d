#pragma once

// Spring, torque, and servo sizing arithmetic for the tendon-driven tip.
//
// Every function here is pure and returns unrounded values. Unit
// conventions: lengths in metres, forces in newtons, torques in N*m,
// moduli in pascals. Servo datasheet torques stay in kg*cm until converted
// with stall_torque_si().

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eversim::mech {

struct SpringSpec {
  double young_modulus_pa = 190e9;
  double poisson_ratio = 0.27;
  double wire_diameter_m = 0.5e-3;
  double outer_diameter_m = 6.0e-3;
  int active_coils = 6;
  double free_length_m = 20.0e-3;

  // Throws DomainError when an invariant is broken.
  void validate() const;

  double mean_coil_diameter_m() const noexcept { return outer_diameter_m - wire_diameter_m; }
};

struct ServoSpec {
  std::string name;
  double operating_angle_deg = 180.0;
  double torque_4v8_kgcm = 0.0;
  double torque_6v_kgcm = 0.0;

  void validate() const;
};

struct SpoolSpec {
  double radius_m = 12.5e-3;

  void validate() const;
};

enum class Supply { V4_8, V6 };

struct ActuationRequirement {
  double total_force_n = 0.0;
  double required_displacement_m = 0.0;

  void validate() const;
};

struct ServoAssessment {
  std::string name;
  double operating_angle_deg = 0.0;
  double stall_torque_nm = 0.0;
  double spool_travel_m = 0.0;
  bool torque_ok = false;
  bool travel_ok = false;

  bool feasible() const noexcept { return torque_ok && travel_ok; }
};

struct FeasibilityReport {
  Supply supply = Supply::V6;
  double required_torque_nm = 0.0;
  double required_displacement_m = 0.0;
  std::vector<ServoAssessment> servos;
  std::optional<std::string> selected;
};

// G = E / (2(1 + v)). Throws DomainError for E <= 0 or v outside [0, 0.5).
double shear_modulus(double young_modulus_pa, double poisson_ratio);

// k = G d^4 / (8 N D^3), D being the mean coil diameter.
double spring_constant(double shear_modulus_pa, double wire_diameter_m, double mean_coil_diameter_m,
                       int active_coils);
double spring_constant(const SpringSpec& spec);

// Hooke's law magnitude |k x|.
double spring_force(double stiffness_n_per_m, double displacement_m);

double required_torque(const ActuationRequirement& req, const SpoolSpec& spool);

// Datasheet kg*cm to N*m using g = 9.81.
double stall_torque_si(double torque_kg_cm);

// Tendon length wound by the spool over the servo's operating angle.
double spool_travel(const SpoolSpec& spool, double operating_angle_deg);

double rated_torque_kgcm(const ServoSpec& servo, Supply supply) noexcept;

// Marks each servo torque_ok/travel_ok and selects the feasible servo with the
// largest operating angle, ties going to the higher torque at `supply`, then to
// catalog order. Throws InputError for an empty catalog.
FeasibilityReport servo_feasibility(std::span<const ServoSpec> catalog, const ActuationRequirement& req,
                                    const SpoolSpec& spool, Supply supply);

// Sizing inputs for the tip: how far each spring is compressed at design
// load, how many springs sit in series along one tendon, and how much tendon
// must be pulled for a full bend.
struct TipDesign {
  SpringSpec spring;
  double design_compression_m = 5.0e-3;
  int joint_count = 5;
  double required_displacement_m = 14.5e-3;
  SpoolSpec spool;
  Supply supply = Supply::V6;
};

// Total force is the per-spring force times the number of joints, matching
// the original sizing procedure (not a series-spring model).
ActuationRequirement actuation_requirement(const TipDesign& design);

// The servo list from the original comparison table.
std::vector<ServoSpec> reference_servo_catalog();

const char* to_string(Supply supply) noexcept;
Supply parse_supply(const std::string& text);

}  // namespace eversim::mech
