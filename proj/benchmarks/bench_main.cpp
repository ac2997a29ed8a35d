#include <benchmark/benchmark.h>

#include "eversim/protocol.hpp"
#include "eversim/scene.hpp"
#include "eversim/simulator.hpp"
#include "eversim/spray.hpp"
#include "eversim/tip_kinematics.hpp"

using namespace eversim;

static void BM_ForwardTipPose(benchmark::State& state) {
  const tip::TipGeometry g;
  double dir = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tip::forward_tip_pose({60.0, dir}, g));
    dir = dir > 359.0 ? 0.0 : dir + 1.0;
  }
}
BENCHMARK(BM_ForwardTipPose);

static void BM_SprayHits(benchmark::State& state) {
  spray::TargetGrid g;
  g.origin = Eigen::Vector3d(-0.2, 0.12, 0.3);
  g.col_axis = Eigen::Vector3d::UnitX();
  g.row_axis = -Eigen::Vector3d::UnitY();
  tip::TipPose t;
  t.heading = g.center().normalized();
  const spray::SpraySpec spec{10.0, 1.0, spray::Flow::aerosol_paint};
  for (auto _ : state) benchmark::DoNotOptimize(spray::spray_hits(t, spec, g));
}
BENCHMARK(BM_SprayHits);

static void BM_SimulatorTick(benchmark::State& state) {
  auto scene = std::make_shared<const scene::Scene>(
      scene::load_scene(std::string(EVERSIM_DATA_DIR) + "/scenes/grid_box.yaml"));
  sim::Simulator sim(scene, {}, 1);
  sim.apply(proto::SetPressure{40.0});
  sim.apply(proto::Joystick{0.3, 0.2});
  sim.apply(proto::Spray{true});
  for (auto _ : state) {
    sim.tick();
    benchmark::DoNotOptimize(sim.take_events());
  }
}
BENCHMARK(BM_SimulatorTick);

static void BM_TelemetryEncodeDecode(benchmark::State& state) {
  auto scene = std::make_shared<const scene::Scene>(
      scene::load_scene(std::string(EVERSIM_DATA_DIR) + "/scenes/grid_box.yaml"));
  sim::Simulator sim(scene, {}, 1);
  const proto::Message frame = sim.telemetry();
  for (auto _ : state) benchmark::DoNotOptimize(proto::decode(proto::encode(frame)));
}
BENCHMARK(BM_TelemetryEncodeDecode);
BENCHMARK_MAIN();
