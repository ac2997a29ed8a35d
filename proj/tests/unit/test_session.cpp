#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eversim/error.hpp"
#include "eversim/scenario.hpp"
#include "eversim/session.hpp"

using namespace eversim;
using namespace eversim::session;
namespace fs = std::filesystem;

namespace {

std::string script_path(const char* name) { return std::string(EVERSIM_DATA_DIR) + "/scripts/" + name; }

// Shared across tests: one noisy raster run.
const scenario::RunRecord& noisy_run() {
  static const auto run = scenario::run_scenario(scenario::load_script(script_path("grid_raster.yaml")));
  return run;
}

SessionLog round_trip(const SessionLog& log) {
  std::stringstream s;
  write_session_log(s, log);
  return read_session_log(s, "mem.jsonl");
}

}  // namespace

TEST(ConfigHash, SensitiveToEveryInput) {
  const auto base = config_hash("scene", "config", {3.0, 0.0}, 1);
  EXPECT_EQ(base.size(), 16u);
  EXPECT_EQ(base, config_hash("scene", "config", {3.0, 0.0}, 1));
  EXPECT_NE(base, config_hash("scene ", "config", {3.0, 0.0}, 1));
  EXPECT_NE(base, config_hash("scene", "config\n", {3.0, 0.0}, 1));
  EXPECT_NE(base, config_hash("scene", "config", {3.0, 0.1}, 1));
  EXPECT_NE(base, config_hash("scene", "config", {3.0, 0.0}, 2));
  // Length prefixes keep the split between the texts significant.
  EXPECT_NE(config_hash("ab", "c", {}, 0), config_hash("a", "bc", {}, 0));
}

TEST(SessionLog, WriteReadRoundTrip) {
  const auto& log = noisy_run().log;
  const auto back = round_trip(log);
  EXPECT_EQ(back.header, log.header);
  ASSERT_EQ(back.records.size(), log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) ASSERT_EQ(back.records[i], log.records[i]) << i;
}

TEST(SessionLog, CommandsCarryTicks) {
  const auto commands = noisy_run().log.commands();
  ASSERT_FALSE(commands.empty());
  std::int64_t last = 0;
  for (const auto& c : commands) {
    ASSERT_TRUE(c.tick);
    EXPECT_GE(*c.tick, last);
    last = *c.tick;
  }
}

TEST(SessionLog, ReadErrorsCarryLineNumbers) {
  std::stringstream s;
  write_session_log(s, noisy_run().log);
  std::string text = s.str();
  const auto second = text.find('\n') + 1;
  const auto third = text.find('\n', second) + 1;
  text.insert(third, "{\"type\":\"command\",\"seq\":1}\n");
  std::istringstream in(text);
  try {
    read_session_log(in, "bad.jsonl");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.file(), "bad.jsonl");
  }
}

TEST(SessionLog, HeaderMustComeFirst) {
  std::istringstream in("{\"type\":\"warning\",\"message\":\"x\"}\n");
  EXPECT_THROW(read_session_log(in), LoadError);
  std::istringstream empty("");
  EXPECT_THROW(read_session_log(empty), LoadError);
}

TEST(Replay, ReproducesFramesBitForBit) {
  const auto& run = noisy_run();
  const auto result = replay(round_trip(run.log));
  EXPECT_TRUE(result.identical) << result.diagnostic;
  EXPECT_EQ(result.frames.size(), run.log.frames().size());
  EXPECT_FALSE(result.first_mismatch);
  ASSERT_TRUE(result.grid_coverage);
  EXPECT_EQ(result.grid_coverage->hit_count(), run.grid_hits);
}

TEST(Replay, ReportFromReplayMatchesLog) {
  const auto& run = noisy_run();
  const auto result = replay(run.log);
  const int counts_log[] = {grid_hit_count(run.log)};
  const int counts_replay[] = {result.grid_coverage->hit_count()};
  EXPECT_EQ(spray::format_coverage_table(spray::coverage_stats(counts_log)),
            spray::format_coverage_table(spray::coverage_stats(counts_replay)));
  EXPECT_EQ(grid_cell_total(run.log), 60);
}

TEST(Replay, AlteredSeedIsRefused) {
  auto log = noisy_run().log;
  log.header.seed += 1;
  EXPECT_THROW(replay(log), ReplayRefused);
}

TEST(Replay, AlteredSceneFileIsRefused) {
  const fs::path dir = fs::temp_directory_path() / "eversim_session_test";
  fs::create_directories(dir / "scenes");
  fs::create_directories(dir / "scripts");
  fs::copy_file(fs::path(EVERSIM_DATA_DIR) / "scenes/grid_box.yaml", dir / "scenes/grid_box.yaml",
                fs::copy_options::overwrite_existing);
  {
    std::ofstream s(dir / "scripts/mini.yaml");
    s << "format: eversim-script/1\nname: mini\nscenario: spray_grid\nscene: ../scenes/grid_box.yaml\n"
         "stop: {max_time_s: 2, on_success: false}\ncommands:\n  - {t: 0.0, set_pressure: 40}\n";
  }
  const auto run = scenario::run_scenario(scenario::load_script((dir / "scripts/mini.yaml").string()));
  EXPECT_TRUE(replay(run.log).identical);
  {
    std::ofstream s(dir / "scenes/grid_box.yaml", std::ios::app);
    s << "# edited\n";
  }
  EXPECT_THROW(replay(run.log), ReplayRefused);
  fs::remove_all(dir);
}

TEST(Replay, TamperedFrameIsReported) {
  auto log = noisy_run().log;
  std::size_t seen = 0;
  for (auto& r : log.records) {
    if (auto* f = std::get_if<proto::TelemetryFrame>(&r)) {
      if (seen++ == 10) f->everted_length_m += 1e-9;
    }
  }
  const auto result = replay(log);
  EXPECT_FALSE(result.identical);
  ASSERT_TRUE(result.first_mismatch);
  EXPECT_EQ(*result.first_mismatch, 10u);
}

TEST(Driver, RejectedCommandIsRecordedWithReply) {
  auto scene = std::make_shared<const scene::Scene>(
      scene::load_scene(std::string(EVERSIM_DATA_DIR) + "/scenes/grid_box.yaml"));
  sim::Simulator sim(scene, {}, 1);
  Driver d(sim);
  d.step();
  const auto reply = d.apply({4, 0, proto::SetPressure{-3.0}, std::nullopt});
  ASSERT_TRUE(reply);
  EXPECT_EQ(reply->field, "kpa");
  EXPECT_EQ(reply->seq, 4);
  const auto recs = d.take_new();
  ASSERT_GE(recs.size(), 3u);
  const auto& cmd = std::get<proto::CommandMessage>(recs[recs.size() - 2]);
  EXPECT_EQ(cmd.tick, 1);
  EXPECT_EQ(std::get<proto::ErrorReply>(recs.back()), *reply);
  EXPECT_TRUE(d.take_new().empty());
}
