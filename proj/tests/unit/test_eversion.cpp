#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eversim/error.hpp"
#include "eversim/eversion.hpp"
#include "eversim/scene.hpp"

using namespace eversim;
using namespace eversim::eversion;

namespace {

// a --main(1 m)--> t, then left (to +y), right (to -y) and ahead (+x), 1 m each.
net::PipeNetwork cross(bool with_straight = true) {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"t", {1, 0, 0}});
  n.add_node({"l", {1, 1, 0}});
  n.add_node({"r", {1, -1, 0}});
  n.add_segment({"main", 0, 1});
  n.add_segment({"left", 1, 2});
  n.add_segment({"right", 1, 3});
  net::Junction j{1, {{1, 0.0, false}, {2, 180.0, false}}};
  if (with_straight) {
    n.add_node({"f", {2, 0, 0}});
    n.add_segment({"ahead", 1, 4});
    j.branches.push_back({3, std::nullopt, true});
  }
  n.add_junction(j);
  n.validate();
  return n;
}

const tip::BendCommand kStraight{0.0, 0.0};

}  // namespace

TEST(Pressure, FirstOrderRegulator) {
  EversionState s;
  s.target_pressure_kpa = 100.0;
  const double tau = 0.5, dt = 0.01;
  for (int i = 0; i < 50; ++i) s = pressure_step(s, dt, tau);
  // After one time constant the response is 1 - 1/e of the step.
  EXPECT_NEAR(s.pressure_kpa, 100.0 * (1.0 - std::exp(-1.0)), 1e-9);
  EXPECT_THROW(pressure_step(s, 0.0, tau), InputError);
}

TEST(Pressure, DecaysToZeroWithoutUndershoot) {
  EversionState s;
  s.pressure_kpa = 50.0;
  for (int i = 0; i < 2000; ++i) {
    s = pressure_step(s, 0.01, 0.5);
    EXPECT_GE(s.pressure_kpa, 0.0);
  }
  EXPECT_LT(s.pressure_kpa, 1e-9);
}

TEST(Growth, LinearAboveThreshold) {
  EversionState s;
  const GrowthParams p;
  s.pressure_kpa = 10.0;
  EXPECT_EQ(growth_demand(s, 0.01, p), 0.0);
  s.pressure_kpa = 40.0;
  EXPECT_NEAR(growth_demand(s, 0.01, p), 0.02 * 30.0 * 0.01, 1e-15);
  s.pressure_kpa = 70.0;
  EXPECT_NEAR(growth_demand(s, 0.01, p), 0.02 * 60.0 * 0.01, 1e-15);
}

TEST(Growth, StatusTransitions) {
  EversionState s;
  s.max_length_m = 0.01;
  const GrowthParams p;
  s.pressure_kpa = 5.0;
  EXPECT_EQ(growth_step(s, 0.01, p).status, GrowthStatus::holding);
  s.pressure_kpa = 60.0;
  s = growth_step(s, 0.01, p);
  EXPECT_EQ(s.status, GrowthStatus::growing);
  EXPECT_NEAR(s.everted_length_m, 0.01, 1e-15);
  s = growth_step(s, 0.01, p);
  EXPECT_EQ(s.status, GrowthStatus::blocked);
  EXPECT_NEAR(s.everted_length_m, 0.01, 1e-15);
}

TEST(Growth, AvailableLimitsAndBlocks) {
  EversionState s;
  s.pressure_kpa = 60.0;
  const auto out = growth_step(s, 0.01, {}, 0.002);
  EXPECT_NEAR(out.everted_length_m, 0.002, 1e-15);
  EXPECT_EQ(out.status, GrowthStatus::blocked);
  ASSERT_EQ(out.wall_ledger.size(), 1u);
  EXPECT_EQ(out.wall_ledger[0].material_coordinate_m, 0.002);
}

TEST(Network, SteersByAzimuth) {
  const auto n = cross();
  const auto start = start_path(n, 0, 0);
  auto r = advance_along_network(start, n, 1.5, {60.0, 10.0});
  EXPECT_FALSE(r.blocked);
  EXPECT_EQ(r.path.current().segment, 1);
  ASSERT_EQ(r.junctions.size(), 1u);
  EXPECT_EQ(r.junctions[0].chosen_segment, 1);
  EXPECT_NEAR((tip_position(r.path, n) - Eigen::Vector3d(1, 0.5, 0)).norm(), 0.0, 1e-12);

  r = advance_along_network(start, n, 1.5, {60.0, 200.0});
  EXPECT_EQ(r.path.current().segment, 2);
}

TEST(Network, DeadbandTakesStraightThrough) {
  const auto n = cross();
  const auto r = advance_along_network(start_path(n, 0, 0), n, 1.25, {10.0, 180.0});
  EXPECT_EQ(r.path.current().segment, 3);
  EXPECT_TRUE(r.junctions[0].straight_through);
}

TEST(Network, DeadbandWithoutStraightBlocks) {
  const auto n = cross(false);
  const auto r = advance_along_network(start_path(n, 0, 0), n, 1.25, kStraight);
  EXPECT_TRUE(r.blocked);
  EXPECT_NEAR(r.advanced_m, 1.0, 1e-15);
  EXPECT_NEAR(r.residual_m, 0.25, 1e-15);
  EXPECT_NE(r.block_reason.find("deadband"), std::string::npos);
}

TEST(Network, EquidistantAzimuthsPickLowestId) {
  const auto n = cross();
  // 90 degrees is equally far from 0 (left) and 180 (right).
  const auto r = advance_along_network(start_path(n, 0, 0), n, 1.5, {60.0, 90.0});
  EXPECT_EQ(n.segment(r.path.current().segment).id, "left");
}

TEST(Network, DeadEndBlocks) {
  const auto n = cross();
  const auto r = advance_along_network(start_path(n, 0, 0), n, 5.0, {60.0, 0.0});
  EXPECT_TRUE(r.blocked);
  EXPECT_NEAR(r.advanced_m, 2.0, 1e-12);
  EXPECT_NE(r.block_reason.find("dead end"), std::string::npos);
}

TEST(Network, RetractPastJunctionDropsBranch) {
  const auto n = cross();
  EversionState s;
  s.everted_length_m = 1.5;
  const auto grown = advance_along_network(start_path(n, 0, 0), n, 1.5, {60.0, 0.0});
  ASSERT_TRUE(grown.path.contains_segment(1));
  const auto back = retract(grown.path, s, 0.7);
  EXPECT_FALSE(back.path.contains_segment(1));
  EXPECT_EQ(back.path.current().segment, 0);
  EXPECT_NEAR(back.path.offset_m, 0.8, 1e-12);
  EXPECT_EQ(back.state.status, GrowthStatus::retracting);
}

TEST(Network, RetractErrors) {
  const auto n = cross();
  EversionState s;
  s.everted_length_m = 0.3;
  const auto p = advance_along_network(start_path(n, 0, 0), n, 0.3, kStraight).path;
  EXPECT_THROW(retract(p, s, 0.4), InputError);
  EXPECT_THROW(retract(p, s, -0.1), InputError);
  EXPECT_NO_THROW(retract(p, s, 0.3));
}

TEST(Network, PositionAtFollowsTraversals) {
  const auto n = cross();
  const auto r = advance_along_network(start_path(n, 0, 0), n, 1.5, {60.0, 0.0});
  EXPECT_NEAR((position_at(r.path, n, 0.5) - Eigen::Vector3d(0.5, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((position_at(r.path, n, 1.25) - Eigen::Vector3d(1, 0.25, 0)).norm(), 0.0, 1e-12);
}

// Properties.

TEST(EversionProperties, WallLedgerIsAppendOnly) {
  const auto n = cross();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EversionState s;
  s.max_length_m = 1.8;
  RobotPath path = start_path(n, 0, 0);
  const GrowthParams params;
  int retracts = 0, grows = 0;
  for (int step = 0; step < 10000; ++step) {
    const auto before = s.wall_ledger;
    if (u(rng) < 0.25 && s.everted_length_m > 0.0) {
      const double len = u(rng) * std::min(0.05, s.everted_length_m);
      auto r = retract(path, s, len);
      path = std::move(r.path);
      s = std::move(r.state);
      ++retracts;
    } else {
      s.pressure_kpa = 10.0 + 90.0 * u(rng);
      const tip::BendCommand steer{60.0, u(rng) < 0.5 ? 0.0 : 180.0};
      const double demand = growth_demand(s, 0.01, params);
      const auto adv = advance_along_network(path, n, demand, steer);
      path = adv.path;
      s = growth_step(s, 0.01, params, adv.blocked ? adv.advanced_m : demand,
                      [&](double m) { return position_at(path, n, m); });
      ++grows;
    }
    // Surviving entries are untouched; only the tail beyond the body is removed.
    const std::size_t keep = std::min(before.size(), s.wall_ledger.size());
    for (std::size_t i = 0; i < keep; ++i) ASSERT_EQ(s.wall_ledger[i], before[i]) << "step " << step;
    for (std::size_t i = keep; i < before.size(); ++i) {
      ASSERT_GT(before[i].material_coordinate_m, s.everted_length_m);
    }
    for (std::size_t i = 1; i < s.wall_ledger.size(); ++i) {
      ASSERT_LT(s.wall_ledger[i - 1].material_coordinate_m, s.wall_ledger[i].material_coordinate_m);
    }
    if (!s.wall_ledger.empty()) ASSERT_LE(s.wall_ledger.back().material_coordinate_m, s.everted_length_m + 1e-12);
    ASSERT_NEAR(path.arclength(), s.everted_length_m, 1e-9) << "step " << step;
  }
  EXPECT_GT(retracts, 1000);
  EXPECT_GT(grows, 5000);
}

TEST(EversionProperties, LedgerPointsLieOnCenterline) {
  const auto n = cross();
  EversionState s;
  s.max_length_m = 2.0;
  s.pressure_kpa = 60.0;
  RobotPath path = start_path(n, 0, 0);
  for (int i = 0; i < 300; ++i) {
    const double demand = growth_demand(s, 0.01, {});
    const auto adv = advance_along_network(path, n, demand, {60.0, 180.0});
    path = adv.path;
    s = growth_step(s, 0.01, {}, adv.blocked ? adv.advanced_m : demand,
                    [&](double m) { return position_at(path, n, m); });
  }
  for (const auto& e : s.wall_ledger) {
    double best = 1e9;
    for (int seg = 0; seg < static_cast<int>(n.segments().size()); ++seg) {
      if (path.contains_segment(seg)) best = std::min(best, n.distance_to_centerline(seg, e.world_position));
    }
    EXPECT_LT(best, 1e-12);
  }
}
