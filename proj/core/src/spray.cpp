#include "eversim/spray.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "eversim/error.hpp"
#include "eversim/units.hpp"

namespace eversim::spray {

void SpraySpec::validate() const {
  if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg < 90.0)) {
    throw DomainError("spray cone_half_angle must be in (0, 90) degrees");
  }
  if (!(range_m > 0.0)) throw DomainError("spray range must be > 0");
}

void TargetGrid::validate() const {
  if (rows < 1 || cols < 1) throw DomainError("grid rows and cols must be >= 1");
  if (!(cell_width_m > 0.0) || !(cell_height_m > 0.0)) throw DomainError("grid cell size must be > 0");
  if (std::fabs(col_axis.norm() - 1.0) > 1e-9 || std::fabs(row_axis.norm() - 1.0) > 1e-9) {
    throw DomainError("grid axes must be unit vectors");
  }
  if (std::fabs(col_axis.dot(row_axis)) > 1e-9) throw DomainError("grid axes must be orthogonal");
}

Eigen::Vector3d TargetGrid::cell_center(int idx) const {
  const int r = idx / cols;
  const int c = idx % cols;
  return origin + (c + 0.5) * cell_width_m * col_axis + (r + 0.5) * cell_height_m * row_axis;
}

Eigen::Vector3d TargetGrid::center() const {
  return origin + 0.5 * cols * cell_width_m * col_axis + 0.5 * rows * cell_height_m * row_axis;
}

std::vector<int> CoverageMap::mark(std::span<const int> cells) {
  std::vector<int> fresh;
  for (int c : cells) {
    const auto i = static_cast<std::size_t>(c);
    if (c < 0 || i >= hits_.size()) throw InputError("cell index out of range");
    if (!hits_[i]) {
      hits_[i] = true;
      ++count_;
      fresh.push_back(c);
    }
  }
  return fresh;
}

std::string CoverageMap::bitstring() const {
  std::string s;
  s.reserve(hits_.size());
  for (bool h : hits_) s.push_back(h ? '1' : '0');
  return s;
}

bool in_spray_cone(const tip::TipPose& tip, const SpraySpec& spec, const Eigen::Vector3d& point,
                   const Eigen::Vector3d& front_normal) {
  const Eigen::Vector3d ray = point - tip.position;
  const double dist = ray.norm();
  if (dist == 0.0 || dist > spec.range_m) return false;
  // The ray must arrive at the plane from its front side.
  if (ray.dot(front_normal) >= 0.0) return false;
  const double cos_angle = ray.dot(tip.heading) / (dist * tip.heading.norm());
  return cos_angle >= std::cos(deg_to_rad(spec.cone_half_angle_deg));
}

std::vector<int> spray_hits(const tip::TipPose& tip, const SpraySpec& spec, const TargetGrid& grid) {
  const Eigen::Vector3d n = grid.normal();
  std::vector<int> out;
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (in_spray_cone(tip, spec, grid.cell_center(i), n)) out.push_back(i);
  }
  return out;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

CoverageReport coverage_stats(std::span<const int> counts, int total_cells) {
  if (total_cells < 1) throw InputError("total_cells must be >= 1");
  if (counts.empty()) throw InputError("no test counts given");
  CoverageReport r;
  r.total_cells = total_cells;
  double count_sum = 0.0;
  double percent_sum = 0.0;
  for (int c : counts) {
    if (c < 0 || c > total_cells) {
      throw InputError("sprayed count " + std::to_string(c) + " outside [0, " + std::to_string(total_cells) + "]");
    }
    CoverageRow row{c, round_to(100.0 * c / total_cells, 1)};
    count_sum += c;
    percent_sum += row.percent;
    r.tests.push_back(row);
  }
  r.average_count = count_sum / counts.size();
  r.average_percent = percent_sum / counts.size();
  return r;
}

std::string format_coverage_table(const CoverageReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "Test number" << std::right << std::setw(20) << "Number of squares"
      << std::setw(29) << "Percentage of grid sprayed" << "\n";
  for (std::size_t i = 0; i < report.tests.size(); ++i) {
    std::ostringstream pct;
    pct << report.tests[i].percent;  // default formatting drops a trailing ".0" like the table
    out << std::left << std::setw(12) << (i + 1) << std::right << std::setw(20) << report.tests[i].sprayed_count
        << std::setw(29) << pct.str() << "\n";
  }
  std::ostringstream avg_count;
  avg_count << round_to(report.average_count, 2);
  std::ostringstream avg_pct;
  avg_pct << std::fixed << std::setprecision(2) << report.average_percent;
  out << std::left << std::setw(12) << "Average" << std::right << std::setw(20) << avg_count.str() << std::setw(29)
      << avg_pct.str() << "\n";
  return out.str();
}

const char* to_string(Flow flow) noexcept {
  switch (flow) {
    case Flow::water:
      return "water";
    case Flow::aerosol_paint:
      return "aerosol_paint";
    case Flow::foam:
      return "foam";
  }
  return "unknown";
}

Flow parse_flow(const std::string& text) {
  if (text == "water") return Flow::water;
  if (text == "aerosol_paint" || text == "paint") return Flow::aerosol_paint;
  if (text == "foam") return Flow::foam;
  throw InputError("unknown spray flow '" + text + "'");
}

}  // namespace eversim::spray
