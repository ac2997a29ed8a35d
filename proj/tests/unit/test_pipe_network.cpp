#include <gtest/gtest.h>

#include <cmath>

#include "eversim/error.hpp"
#include "eversim/pipe_network.hpp"
#include "eversim/scene.hpp"

using namespace eversim;

namespace {

constexpr double kPiOracle = 3.14159265358979323846;

net::PipeNetwork quarter_bend() {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"b", {1, 1, 0}});
  net::PipeSegment s;
  s.id = "arc";
  s.from = 0;
  s.to = 1;
  s.shape = net::SegmentShape::arc;
  s.via = Eigen::Vector3d(1 - std::cos(kPiOracle / 4), std::sin(kPiOracle / 4), 0);
  n.add_segment(s);
  n.validate();
  return n;
}

const char* kTeeScene = R"(format: eversim-scene/1
name: tee
nodes:
  - {id: a, position: [0, 0, 0]}
  - {id: t, position: [1, 0, 0]}
  - {id: l, position: [1, 1, 0]}
  - {id: r, position: [2, 0, 0]}
segments:
  - {id: main, from: a, to: t}
  - {id: left, from: t, to: l}
  - {id: ahead, from: t, to: r}
junctions:
  - node: t
    branches:
      - {segment: left, azimuth_deg: 0}
      - {segment: ahead, straight: true}
robot: {start_node: a, start_segment: main}
)";

}  // namespace

TEST(Circumcenter, UnitCircle) {
  const auto c = net::circumcenter({1, 0, 0}, {0, 1, 0}, {-1, 0, 0});
  EXPECT_NEAR(c.norm(), 0.0, 1e-15);
  EXPECT_THROW(net::circumcenter({0, 0, 0}, {1, 0, 0}, {2, 0, 0}), DomainError);
}

TEST(PipeNetwork, ArcLengthAndGeometry) {
  const auto n = quarter_bend();
  const auto& s = n.segment(0);
  EXPECT_NEAR(s.arc_radius_m, 1.0, 1e-12);
  EXPECT_NEAR(s.length_m, kPiOracle / 2.0, 1e-12);
  const Eigen::Vector3d mid = n.point({0, true, s.length_m / 2});
  EXPECT_NEAR((mid - s.via).norm(), 0.0, 1e-12);
  EXPECT_NEAR((n.tangent({0, true, 0.0}) - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((n.tangent({0, true, s.length_m}) - Eigen::Vector3d::UnitX()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((n.point({0, false, 0.0}) - Eigen::Vector3d(1, 1, 0)).norm(), 0.0, 1e-12);
  const Eigen::Vector3d on_arc(1 - std::cos(kPiOracle / 6), std::sin(kPiOracle / 6), 0);
  EXPECT_NEAR(n.distance_to_centerline(0, on_arc), 0.0, 1e-12);
  EXPECT_NEAR(n.distance_to_centerline(0, Eigen::Vector3d(1, 0, 0)), 1.0, 1e-12);  // arc centre
}

TEST(PipeNetwork, StraightSegment) {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"b", {2, 0, 0}});
  n.add_segment({"s", 0, 1});
  n.validate();
  EXPECT_DOUBLE_EQ(n.segment(0).length_m, 2.0);
  EXPECT_EQ(n.exit_node(0, true), 1);
  EXPECT_EQ(n.exit_node(0, false), 0);
  EXPECT_EQ(n.entry_node(0, true), 0);
  EXPECT_NEAR(n.distance_to_centerline(0, {1, 0.5, 0}), 0.5, 1e-15);
}

TEST(PipeNetwork, FrameConvention) {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"b", {1, 0, 0}});
  n.add_node({"c", {1, 0, 1}});
  n.add_segment({"flat", 0, 1});
  n.add_segment({"up", 1, 2});
  n.validate();
  const auto f = n.frame({0, true, 0.5});
  EXPECT_NEAR((f.linear().col(2) - Eigen::Vector3d::UnitX()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((f.linear().col(1) - Eigen::Vector3d::UnitZ()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((f.linear().col(0) - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-15);
  const auto v = n.frame({1, true, 0.5});
  EXPECT_NEAR((v.linear().col(1) - Eigen::Vector3d::UnitY()).norm(), 0.0, 1e-15);
  EXPECT_NEAR(v.linear().determinant(), 1.0, 1e-12);
}

TEST(PipeNetwork, Validation) {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"b", {1, 0, 0}});
  n.add_node({"c", {5, 5, 5}});
  n.add_segment({"s", 0, 1});
  EXPECT_THROW(n.validate(), DomainError);  // c is disconnected
  EXPECT_THROW(n.add_node({"a", {9, 9, 9}}), DomainError);
  EXPECT_THROW(n.add_segment({"loop", 0, 0}), DomainError);
}

TEST(PipeNetwork, JunctionTableRequired) {
  net::PipeNetwork n;
  n.add_node({"a", {0, 0, 0}});
  n.add_node({"t", {1, 0, 0}});
  n.add_node({"l", {1, 1, 0}});
  n.add_node({"r", {2, 0, 0}});
  n.add_segment({"main", 0, 1});
  n.add_segment({"left", 1, 2});
  n.add_segment({"ahead", 1, 3});
  EXPECT_THROW(n.validate(), DomainError);
}

TEST(Scene, ParsesTee) {
  const auto s = scene::parse_scene(kTeeScene, "tee.yaml");
  EXPECT_EQ(s.name, "tee");
  EXPECT_EQ(s.network.nodes().size(), 4u);
  ASSERT_NE(s.network.junction_at(1), nullptr);
  EXPECT_EQ(s.network.junction_at(1)->branches.size(), 2u);
  EXPECT_FALSE(s.grid.has_value());
  EXPECT_EQ(s.source_text, kTeeScene);
}

TEST(Scene, UnknownNodeNamesLineAndField) {
  std::string text = kTeeScene;
  text.replace(text.find("to: l}"), 6, "to: q}");
  try {
    scene::parse_scene(text, "tee.yaml");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.file(), "tee.yaml");
    EXPECT_EQ(e.line(), 10);
    EXPECT_EQ(e.field(), "segments[1].to");
  }
}

TEST(Scene, MissingFormatHeader) {
  std::string text = kTeeScene;
  text.erase(0, text.find('\n') + 1);
  EXPECT_THROW(scene::parse_scene(text), LoadError);
}

TEST(Scene, WrongTypeIsLoadError) {
  std::string text = kTeeScene;
  text.replace(text.find("position: [0, 0, 0]"), 19, "position: zero");
  try {
    scene::parse_scene(text);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.field(), "nodes[0].position");
  }
}

TEST(Scene, ShippedScenesLoad) {
  for (const char* name : {"grid_box", "tee_glovebox", "foam_box"}) {
    const auto s = scene::load_scene(std::string(EVERSIM_DATA_DIR) + "/scenes/" + name + ".yaml");
    EXPECT_FALSE(s.terminals.empty()) << name;
  }
}

TEST(TerminalBox, WallsFaceInwards) {
  const auto box = scene::make_terminal_box("b", 0, {0, 0, 0}, {1, 2, 3}, 4);
  ASSERT_EQ(box.walls.size(), 6u);
  const Eigen::Vector3d centre(0.5, 1.0, 1.5);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& w = box.walls[i];
    EXPECT_EQ(w.name, scene::kWallNames[i]);
    EXPECT_EQ(w.cell_count(), 16);
    EXPECT_GT((centre - w.center()).dot(w.normal()), 0.0) << w.name;
    for (int c = 0; c < w.cell_count(); ++c) {
      EXPECT_TRUE(box.contains(w.cell_center(c))) << w.name;
    }
  }
  EXPECT_EQ(box.wall_index("z_max"), 5);
  EXPECT_FALSE(box.wall_index("roof"));
  EXPECT_THROW(scene::make_terminal_box("b", 0, {0, 0, 0}, {0, 1, 1}, 4), DomainError);
}
