#pragma once

// Geometric spray model: a cone from the tip along its heading. A target
// cell counts as hit when its centre lies inside the cone, within range, and
// on the front face of the target plane. No deposition physics.

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "eversim/tip_kinematics.hpp"

namespace eversim::spray {

enum class Flow { water, aerosol_paint, foam };

struct SpraySpec {
  double cone_half_angle_deg = 10.0;
  double range_m = 1.0;
  Flow flow = Flow::aerosol_paint;

  void validate() const;
};

// Rectangular grid of cells on a plane. Cell (row, col) spans
// origin + [col, col+1) * cell_width * col_axis + [row, row+1) * cell_height * row_axis.
// The front face is the side col_axis x row_axis points to.
struct TargetGrid {
  int rows = 6;
  int cols = 10;
  double cell_width_m = 0.04;
  double cell_height_m = 0.04;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d col_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d row_axis = Eigen::Vector3d::UnitY();
  std::string name;

  void validate() const;

  int cell_count() const noexcept { return rows * cols; }
  int index(int row, int col) const noexcept { return row * cols + col; }
  Eigen::Vector3d normal() const { return col_axis.cross(row_axis).normalized(); }
  Eigen::Vector3d cell_center(int index) const;
  Eigen::Vector3d cell_center(int row, int col) const { return cell_center(index(row, col)); }
  Eigen::Vector3d center() const;
};

// Hit flags for one grid within a run. Flags are set-only.
class CoverageMap {
 public:
  explicit CoverageMap(int cells = 0) : hits_(static_cast<std::size_t>(cells), false) {}

  // Returns the indices that were newly set.
  std::vector<int> mark(std::span<const int> cells);
  bool hit(int index) const { return hits_.at(static_cast<std::size_t>(index)); }
  int hit_count() const noexcept { return count_; }
  int cell_count() const noexcept { return static_cast<int>(hits_.size()); }
  double fraction() const noexcept { return hits_.empty() ? 0.0 : static_cast<double>(count_) / hits_.size(); }
  std::string bitstring() const;

 private:
  std::vector<bool> hits_;
  int count_ = 0;
};

bool in_spray_cone(const tip::TipPose& tip, const SpraySpec& spec, const Eigen::Vector3d& point,
                   const Eigen::Vector3d& front_normal);

// Sorted indices of the cells whose centres the spray reaches.
std::vector<int> spray_hits(const tip::TipPose& tip, const SpraySpec& spec, const TargetGrid& grid);

struct CoverageRow {
  int sprayed_count = 0;
  double percent = 0.0;  // 100 * count / total, rounded to one decimal
};

struct CoverageReport {
  int total_cells = 60;
  std::vector<CoverageRow> tests;
  double average_count = 0.0;
  // Mean of the rounded per-test percentages, as tabulated.
  double average_percent = 0.0;
};

double round_to(double value, int decimals);

// Throws InputError when a count is outside [0, total_cells] or the list is empty.
CoverageReport coverage_stats(std::span<const int> counts, int total_cells = 60);

// Test number / number of squares / percentage table with an average row.
std::string format_coverage_table(const CoverageReport& report);

const char* to_string(Flow flow) noexcept;
Flow parse_flow(const std::string& text);

}  // namespace eversim::spray
