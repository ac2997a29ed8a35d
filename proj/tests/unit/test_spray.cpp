#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eversim/error.hpp"
#include "eversim/spray.hpp"

using namespace eversim;
using namespace eversim::spray;

namespace {

constexpr double kPiOracle = 3.14159265358979323846;

// Brute force: every cell centre checked with an explicit angle.
std::vector<int> oracle_hits(const tip::TipPose& tip, const SpraySpec& spec, const TargetGrid& grid) {
  std::vector<int> out;
  const Eigen::Vector3d n = grid.col_axis.cross(grid.row_axis).normalized();
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Eigen::Vector3d centre = grid.origin + (c + 0.5) * grid.cell_width_m * grid.col_axis +
                                     (r + 0.5) * grid.cell_height_m * grid.row_axis;
      const Eigen::Vector3d v = centre - tip.position;
      const double dist = v.norm();
      if (dist == 0.0 || dist > spec.range_m) continue;
      const double angle = std::acos(std::clamp(v.dot(tip.heading) / dist, -1.0, 1.0)) * 180.0 / kPiOracle;
      if (angle > spec.cone_half_angle_deg) continue;
      if (v.dot(n) >= 0.0) continue;
      out.push_back(r * grid.cols + c);
    }
  }
  return out;
}

// 6 x 10 grid in the plane z = 0.3, facing -z.
TargetGrid facing_grid(double cell) {
  TargetGrid g;
  g.cell_width_m = cell;
  g.cell_height_m = cell;
  g.col_axis = Eigen::Vector3d::UnitX();
  g.row_axis = -Eigen::Vector3d::UnitY();
  g.origin = Eigen::Vector3d(-5 * cell, 3 * cell, 0.3);
  return g;
}

}  // namespace

TEST(TargetGrid, Geometry) {
  const auto g = facing_grid(0.04);
  EXPECT_EQ(g.cell_count(), 60);
  EXPECT_NEAR((g.normal() - Eigen::Vector3d(0, 0, -1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((g.cell_center(0) - Eigen::Vector3d(-0.18, 0.10, 0.3)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((g.center() - Eigen::Vector3d(0, 0, 0.3)).norm(), 0.0, 1e-15);
}

TEST(SprayHits, AimedAtCellCentre) {
  const auto g = facing_grid(0.04);
  const int target = g.index(2, 3);
  tip::TipPose tip;
  tip.heading = g.cell_center(target).normalized();
  const auto hits = spray_hits(tip, {10.0, 1.0, Flow::aerosol_paint}, g);
  EXPECT_NE(std::find(hits.begin(), hits.end(), target), hits.end());
}

TEST(SprayHits, FacingAwayHitsNothing) {
  const auto g = facing_grid(0.04);
  tip::TipPose tip;
  tip.heading = -Eigen::Vector3d::UnitZ();
  EXPECT_TRUE(spray_hits(tip, {10.0, 1.0, Flow::water}, g).empty());
}

TEST(SprayHits, BackFaceIsNotHit) {
  auto g = facing_grid(0.04);
  std::swap(g.col_axis, g.row_axis);  // normal now +z, away from the tip
  g.origin = Eigen::Vector3d(0.1, -0.2, 0.3);
  tip::TipPose tip;
  tip.heading = g.center().normalized();
  EXPECT_TRUE(spray_hits(tip, {30.0, 1.0, Flow::water}, g).empty());
}

TEST(SprayHits, OutOfRange) {
  const auto g = facing_grid(0.04);
  tip::TipPose tip;
  EXPECT_TRUE(spray_hits(tip, {10.0, 0.25, Flow::foam}, g).empty());
}

TEST(SprayHits, TenDegreeConeOnThirtyMillimetreCells) {
  const auto g = facing_grid(0.03);
  tip::TipPose tip;
  tip.heading = g.cell_center(g.index(2, 4)).normalized();
  const SpraySpec spec{10.0, 1.0, Flow::aerosol_paint};
  const auto hits = spray_hits(tip, spec, g);
  EXPECT_EQ(hits, oracle_hits(tip, spec, g));
  EXPECT_GT(hits.size(), 1u);
}

TEST(SpraySpecValidation, Bounds) {
  EXPECT_THROW((SpraySpec{0.0, 1.0, Flow::water}).validate(), DomainError);
  EXPECT_THROW((SpraySpec{90.0, 1.0, Flow::water}).validate(), DomainError);
  EXPECT_THROW((SpraySpec{10.0, 0.0, Flow::water}).validate(), DomainError);
  EXPECT_NO_THROW((SpraySpec{10.0, 1.0, Flow::water}).validate());
}

TEST(CoverageMap, SetOnlyFlags) {
  CoverageMap m(60);
  const int a[] = {3, 5, 3};
  EXPECT_EQ(m.mark(a), (std::vector<int>{3, 5}));
  const int b[] = {5, 7};
  EXPECT_EQ(m.mark(b), (std::vector<int>{7}));
  EXPECT_EQ(m.hit_count(), 3);
  EXPECT_TRUE(m.hit(3));
  EXPECT_FALSE(m.hit(4));
  const int bad[] = {60};
  EXPECT_THROW(m.mark(bad), InputError);
  EXPECT_EQ(m.hit_count(), 3);
}

TEST(CoverageStats, ComparisonTable) {
  const int counts[] = {60, 59, 57, 60, 56, 59, 59, 55, 60, 57};
  const double percents[] = {100, 98.3, 95, 100, 93.3, 98.3, 98.3, 91.7, 100, 95};
  const auto r = coverage_stats(counts);
  ASSERT_EQ(r.tests.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(r.tests[i].sprayed_count, counts[i]);
    EXPECT_NEAR(r.tests[i].percent, percents[i], 1e-9) << "test " << i + 1;
  }
  EXPECT_NEAR(r.average_count, 58.2, 1e-12);
  EXPECT_NEAR(r.average_percent, 96.99, 0.01);
  EXPECT_EQ(round_to(r.average_percent, 2), 96.99);
}

TEST(CoverageStats, SingleRows) {
  const int full[] = {60};
  EXPECT_EQ(coverage_stats(full).tests[0].percent, 100.0);
  const int none[] = {0};
  EXPECT_EQ(coverage_stats(none).tests[0].percent, 0.0);
}

TEST(CoverageStats, RejectsBadCounts) {
  const int over[] = {61};
  EXPECT_THROW(coverage_stats(over), InputError);
  const int under[] = {-1};
  EXPECT_THROW(coverage_stats(under), InputError);
  EXPECT_THROW(coverage_stats(std::span<const int>{}), InputError);
}

TEST(CoverageStats, TableFormat) {
  const int counts[] = {60, 59};
  const auto text = format_coverage_table(coverage_stats(counts));
  EXPECT_NE(text.find("Test number"), std::string::npos);
  EXPECT_NE(text.find("98.3"), std::string::npos);
  EXPECT_NE(text.find("Average"), std::string::npos);
  EXPECT_NE(text.find("99.15"), std::string::npos);
}

TEST(Flow, Names) {
  for (auto f : {Flow::water, Flow::aerosol_paint, Flow::foam}) EXPECT_EQ(parse_flow(to_string(f)), f);
  EXPECT_THROW(parse_flow("lava"), InputError);
}

// Properties.

TEST(SprayProperties, MatchesExhaustiveOracle) {
  const auto g = facing_grid(0.04);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(-0.3, 0.3), angle(2.0, 40.0), range(0.1, 1.0);
  std::normal_distribution<double> dir(0.0, 1.0);
  int nonempty = 0;
  for (int i = 0; i < 1000; ++i) {
    tip::TipPose tip;
    tip.position = Eigen::Vector3d(pos(rng), pos(rng), pos(rng) * 0.5);
    Eigen::Vector3d h(dir(rng), dir(rng), std::fabs(dir(rng)) + 0.5);
    tip.heading = h.normalized();
    const SpraySpec spec{angle(rng), range(rng), Flow::water};
    const auto hits = spray_hits(tip, spec, g);
    ASSERT_EQ(hits, oracle_hits(tip, spec, g)) << "pose " << i;
    if (!hits.empty()) ++nonempty;
  }
  EXPECT_GT(nonempty, 100);
}

TEST(SprayProperties, CoverageMonotone) {
  const auto g = facing_grid(0.04);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> dir(0.0, 0.4);
  CoverageMap m(g.cell_count());
  int last = 0;
  for (int i = 0; i < 500; ++i) {
    tip::TipPose tip;
    tip.heading = Eigen::Vector3d(dir(rng), dir(rng), 1.0).normalized();
    m.mark(spray_hits(tip, {6.0, 1.0, Flow::aerosol_paint}, g));
    EXPECT_GE(m.hit_count(), last);
    last = m.hit_count();
  }
}

TEST(SprayProperties, ReportAveragesAreMeans) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> c(0, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> counts(1 + trial % 12);
    for (int& v : counts) v = c(rng);
    const auto r = coverage_stats(counts);
    double sum = 0.0, pct = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      sum += counts[i];
      pct += std::round(1000.0 * counts[i] / 60.0) / 10.0;
    }
    EXPECT_NEAR(r.average_count, sum / counts.size(), 1e-9);
    EXPECT_NEAR(r.average_percent, pct / counts.size(), 1e-9);
  }
}
