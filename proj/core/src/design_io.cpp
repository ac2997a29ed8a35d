#include "eversim/design_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eversim/error.hpp"
#include "yaml_util.hpp"

namespace eversim {

namespace detail {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path, 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

namespace mech {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& source, int line, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw LoadError(source, line, field, "not a number: '" + text + "'");
  }
}

const char* const kCatalogColumns[] = {"name", "operating_angle_deg", "torque_4v8_kgcm", "torque_6v_kgcm"};

}  // namespace

std::vector<ServoSpec> parse_servo_catalog(std::istream& in, const std::string& source) {
  std::vector<ServoSpec> out;
  std::string raw;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv(line);
    if (!have_header) {
      if (cells.size() != 4) throw LoadError(source, line_no, "header", "expected 4 columns");
      for (std::size_t i = 0; i < 4; ++i) {
        if (cells[i] != kCatalogColumns[i]) {
          throw LoadError(source, line_no, "header",
                          "column " + std::to_string(i + 1) + " must be '" + kCatalogColumns[i] + "'");
        }
      }
      have_header = true;
      continue;
    }
    if (cells.size() != 4) {
      throw LoadError(source, line_no, "row", "expected 4 columns, got " + std::to_string(cells.size()));
    }
    ServoSpec s;
    s.name = cells[0];
    s.operating_angle_deg = parse_number(cells[1], source, line_no, kCatalogColumns[1]);
    s.torque_4v8_kgcm = parse_number(cells[2], source, line_no, kCatalogColumns[2]);
    s.torque_6v_kgcm = parse_number(cells[3], source, line_no, kCatalogColumns[3]);
    try {
      s.validate();
    } catch (const DomainError& e) {
      throw LoadError(source, line_no, "row", e.what());
    }
    out.push_back(std::move(s));
  }
  if (!have_header) throw LoadError(source, line_no, "header", "missing header row");
  return out;
}

std::vector<ServoSpec> load_servo_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "", "cannot open file");
  return parse_servo_catalog(in, path);
}

void write_servo_catalog(std::ostream& out, const std::vector<ServoSpec>& catalog) {
  out << "name,operating_angle_deg,torque_4v8_kgcm,torque_6v_kgcm\n";
  for (const auto& s : catalog) {
    out << s.name << ',' << s.operating_angle_deg << ',' << s.torque_4v8_kgcm << ',' << s.torque_6v_kgcm << '\n';
  }
}

TipDesign parse_tip_design(const std::string& text, const std::string& source) {
  detail::YamlDoc doc(text, source);
  doc.expect_format("eversim-design", 1);
  const YAML::Node& root = doc.root();
  TipDesign d;
  if (const YAML::Node s = root["spring"]) {
    d.spring.young_modulus_pa = doc.number(s, "young_modulus_pa", "spring.young_modulus_pa", d.spring.young_modulus_pa);
    d.spring.poisson_ratio = doc.number(s, "poisson_ratio", "spring.poisson_ratio", d.spring.poisson_ratio);
    d.spring.wire_diameter_m = doc.number(s, "wire_diameter_m", "spring.wire_diameter_m", d.spring.wire_diameter_m);
    d.spring.outer_diameter_m =
        doc.number(s, "outer_diameter_m", "spring.outer_diameter_m", d.spring.outer_diameter_m);
    d.spring.active_coils = doc.integer(s, "active_coils", "spring.active_coils", d.spring.active_coils);
    d.spring.free_length_m = doc.number(s, "free_length_m", "spring.free_length_m", d.spring.free_length_m);
    try {
      d.spring.validate();
    } catch (const DomainError& e) {
      throw doc.error(s, "spring", e.what());
    }
  }
  d.design_compression_m = doc.number(root, "design_compression_m", "design_compression_m", d.design_compression_m);
  d.joint_count = doc.integer(root, "joint_count", "joint_count", d.joint_count);
  d.required_displacement_m =
      doc.number(root, "required_displacement_m", "required_displacement_m", d.required_displacement_m);
  d.spool.radius_m = doc.number(root, "spool_radius_m", "spool_radius_m", d.spool.radius_m);
  if (const YAML::Node sup = root["supply"]) {
    try {
      d.supply = parse_supply(doc.as<std::string>(sup, "supply"));
    } catch (const InputError& e) {
      throw doc.error(sup, "supply", e.what());
    }
  }
  if (d.joint_count < 1) throw doc.error(root["joint_count"], "joint_count", "must be >= 1");
  if (d.spool.radius_m <= 0.0) throw doc.error(root["spool_radius_m"], "spool_radius_m", "must be > 0");
  if (d.design_compression_m < 0.0) throw doc.error(root, "design_compression_m", "must be >= 0");
  if (d.required_displacement_m < 0.0) throw doc.error(root, "required_displacement_m", "must be >= 0");
  return d;
}

TipDesign load_tip_design(const std::string& path) { return parse_tip_design(detail::read_text_file(path), path); }

DesignCheck run_design_check(const TipDesign& design, const std::vector<ServoSpec>& catalog) {
  DesignCheck c;
  c.design = design;
  c.shear_modulus_pa = shear_modulus(design.spring.young_modulus_pa, design.spring.poisson_ratio);
  c.spring_constant_n_per_m = spring_constant(design.spring);
  c.per_spring_force_n = spring_force(c.spring_constant_n_per_m, design.design_compression_m);
  c.requirement = actuation_requirement(design);
  c.report = servo_feasibility(catalog, c.requirement, design.spool, design.supply);
  return c;
}

std::string format_design_check(const DesignCheck& c) {
  std::ostringstream out;
  out << std::fixed;
  out << "Spring\n";
  out << "  shear modulus        " << std::setprecision(2) << c.shear_modulus_pa / 1e9 << " GPa\n";
  out << "  mean coil diameter   " << std::setprecision(3) << c.design.spring.mean_coil_diameter_m() * 1e3
      << " mm\n";
  out << "  spring constant      " << std::setprecision(1) << c.spring_constant_n_per_m << " N/m\n";
  out << "  force per spring     " << std::setprecision(3) << c.per_spring_force_n << " N at "
      << std::setprecision(1) << c.design.design_compression_m * 1e3 << " mm\n";
  out << "Actuation\n";
  out << "  total force          " << std::setprecision(3) << c.requirement.total_force_n << " N ("
      << c.design.joint_count << " springs)\n";
  out << "  spool radius         " << std::setprecision(2) << c.design.spool.radius_m * 1e3 << " mm\n";
  out << "  required torque      " << std::setprecision(4) << c.report.required_torque_nm << " N*m\n";
  out << "  required travel      " << std::setprecision(1) << c.report.required_displacement_m * 1e3 << " mm\n";
  out << "Servos at " << to_string(c.report.supply) << "\n";
  out << "  " << std::left << std::setw(14) << "servo" << std::right << std::setw(7) << "angle" << std::setw(12)
      << "stall N*m" << std::setw(12) << "travel mm" << std::setw(8) << "torque" << std::setw(8) << "travel"
      << "\n";
  for (const auto& s : c.report.servos) {
    out << "  " << std::left << std::setw(14) << s.name << std::right << std::setw(7) << std::setprecision(0)
        << s.operating_angle_deg << std::setw(12) << std::setprecision(4) << s.stall_torque_nm << std::setw(12)
        << std::setprecision(2) << s.spool_travel_m * 1e3 << std::setw(8) << (s.torque_ok ? "ok" : "FAIL")
        << std::setw(8) << (s.travel_ok ? "ok" : "FAIL") << "\n";
  }
  out << "Selected: " << (c.report.selected ? *c.report.selected : std::string("none")) << "\n";
  return out.str();
}

std::string design_check_json(const DesignCheck& c) {
  nlohmann::json j;
  j["shear_modulus_pa"] = c.shear_modulus_pa;
  j["spring_constant_n_per_m"] = c.spring_constant_n_per_m;
  j["per_spring_force_n"] = c.per_spring_force_n;
  j["total_force_n"] = c.requirement.total_force_n;
  j["required_displacement_m"] = c.requirement.required_displacement_m;
  j["spool_radius_m"] = c.design.spool.radius_m;
  j["supply"] = to_string(c.report.supply);
  j["required_torque_nm"] = c.report.required_torque_nm;
  j["servos"] = nlohmann::json::array();
  for (const auto& s : c.report.servos) {
    j["servos"].push_back({{"name", s.name},
                           {"operating_angle_deg", s.operating_angle_deg},
                           {"stall_torque_nm", s.stall_torque_nm},
                           {"spool_travel_m", s.spool_travel_m},
                           {"torque_ok", s.torque_ok},
                           {"travel_ok", s.travel_ok}});
  }
  j["selected"] = c.report.selected ? nlohmann::json(*c.report.selected) : nlohmann::json(nullptr);
  return j.dump(2);
}

}  // namespace mech
}  // namespace eversim
