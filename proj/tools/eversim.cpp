// eversim: command line front end.
//
//   eversim serve --scene S --config C --port N [--realtime] [--seed N] [--record LOG]
//   eversim run --script F [--seed N] --out LOG
//   eversim replay --log LOG
//   eversim report --log LOG [--log LOG ...] | --counts 60,59,...
//   eversim design-check --springs DESIGN --servos CATALOG [--json]
//
// Exit status: 0 ok, 1 check failed (replay mismatch, infeasible design,
// scenario not successful), 2 bad input.

#include <csignal>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eversim/design_io.hpp"
#include "eversim/gateway.hpp"
#include "eversim/scenario.hpp"
#include "eversim/scene.hpp"
#include "eversim/session.hpp"
#include "eversim/sim_config.hpp"
#include "eversim/spray.hpp"

namespace {

eversim::gateway::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

std::string absolute(const std::string& path) {
  if (path.empty()) return path;
  return std::filesystem::absolute(path).lexically_normal().string();
}

std::string parent_dir(const std::string& path) {
  return std::filesystem::absolute(path).parent_path().string();
}

int cmd_serve(const std::string& scene_path, const std::string& config_path, int port, bool realtime,
              std::uint64_t seed, const std::string& record, const std::string& bind, long long max_ticks) {
  auto scene = std::make_shared<eversim::scene::Scene>(eversim::scene::load_scene(scene_path));
  eversim::sim::SimConfig config;
  if (!config_path.empty()) config = eversim::sim::load_sim_config(config_path);
  eversim::gateway::GatewayCore core(scene, config, seed, {absolute(scene_path), absolute(config_path), {}});
  eversim::gateway::ServerOptions options;
  options.bind_address = bind;
  options.port = static_cast<std::uint16_t>(port);
  options.realtime = realtime;
  if (max_ticks > 0) options.max_ticks = max_ticks;
  eversim::gateway::Server server(core, options);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "eversim: serving scene '" << scene->name << "' on " << bind << ":" << server.port()
            << (realtime ? " (realtime)" : "") << std::endl;
  server.run();
  g_server = nullptr;
  if (!record.empty()) {
    eversim::session::save_session_log(record, core.session_log());
    std::cerr << "eversim: session written to " << record << "\n";
  }
  return 0;
}

int cmd_run(const std::string& script_path, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto script = eversim::scenario::load_script(script_path);
  eversim::scenario::RunOptions options;
  options.seed = seed;
  const auto rec = eversim::scenario::run_scenario(script, options);
  eversim::session::save_session_log(out, rec.log);

  const auto frames = rec.log.frames();
  std::cout << "scenario   " << script.name << " (" << eversim::scenario::to_string(script.type) << ")\n"
            << "seed       " << rec.log.header.seed << "\n"
            << "hash       " << rec.log.header.config_hash << "\n"
            << "frames     " << frames.size() << "\n"
            << "sim time   " << (frames.empty() ? 0.0 : frames.back().sim_time_s) << " s\n";
  if (rec.coverage) {
    std::cout << "coverage   " << rec.grid_hits << "/" << rec.grid_cells << " (" << rec.coverage->tests[0].percent
              << "%)\n";
  }
  if (!rec.wall_fractions.empty()) {
    std::cout << "walls     ";
    for (std::size_t i = 0; i < rec.wall_fractions.size(); ++i) {
      std::cout << " " << eversim::scene::kWallNames[i] << "=" << rec.wall_fractions[i];
    }
    std::cout << "\n";
  }
  if (script.type != eversim::scenario::ScenarioType::spray_grid) {
    std::cout << "success    " << (rec.success ? "yes" : "no");
    if (rec.success_tick) std::cout << " (tick " << *rec.success_tick << ")";
    std::cout << "\n";
    return rec.success ? 0 : 1;
  }
  return 0;
}

int cmd_replay(const std::string& log_path) {
  const auto log = eversim::session::load_session_log(log_path);
  try {
    const auto result = eversim::session::replay(log, parent_dir(log_path));
    if (!result.identical) {
      std::cout << "replay: MISMATCH: " << result.diagnostic << "\n";
      return 1;
    }
    std::cout << "replay: " << result.frames.size() << " frames identical";
    if (result.grid_coverage) {
      std::cout << ", grid " << result.grid_coverage->hit_count() << "/" << result.grid_coverage->cell_count();
    }
    std::cout << "\n";
    return 0;
  } catch (const eversim::session::ReplayRefused& e) {
    std::cerr << "replay refused: " << e.what() << "\n";
    return 2;
  }
}

int cmd_report(const std::vector<std::string>& logs, const std::string& counts_text) {
  std::vector<int> counts;
  int total = 60;
  if (!counts_text.empty()) {
    std::stringstream ss(counts_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        counts.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw eversim::InputError("--counts: '" + item + "' is not an integer");
      }
    }
  }
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto log = eversim::session::load_session_log(logs[i]);
    const int cells = eversim::session::grid_cell_total(log);
    if (i == 0 && counts_text.empty()) total = cells;
    if (cells != total) throw eversim::InputError(logs[i] + ": grid has " + std::to_string(cells) + " cells, expected " +
                                                  std::to_string(total));
    counts.push_back(eversim::session::grid_hit_count(log));
  }
  if (counts.empty()) throw eversim::InputError("nothing to report: pass --log or --counts");
  std::cout << eversim::spray::format_coverage_table(eversim::spray::coverage_stats(counts, total));
  return 0;
}

int cmd_design_check(const std::string& springs, const std::string& servos, bool json) {
  const auto design = eversim::mech::load_tip_design(springs);
  const auto catalog = eversim::mech::load_servo_catalog(servos);
  const auto check = eversim::mech::run_design_check(design, catalog);
  std::cout << (json ? eversim::mech::design_check_json(check) + "\n" : eversim::mech::format_design_check(check));
  return check.report.selected ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tendon-steered eversion robot simulator and design calculator"};
  app.require_subcommand(1);

  std::string scene, config, bind = "127.0.0.1", record;
  int port = 8765;
  bool realtime = false;
  std::uint64_t serve_seed = 0;
  long long max_ticks = 0;
  auto* serve = app.add_subcommand("serve", "Run the teleoperation gateway");
  serve->add_option("--scene", scene, "Scene file")->required()->check(CLI::ExistingFile);
  serve->add_option("--config", config, "Simulator config file")->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_flag("--realtime", realtime, "Pace ticks to wall clock");
  serve->add_option("--seed", serve_seed, "Noise seed");
  serve->add_option("--record", record, "Write the session log here on exit");
  serve->add_option("--bind", bind, "Listen address");
  serve->add_option("--max-ticks", max_ticks, "Stop after this many ticks");

  std::string script, out;
  std::optional<std::uint64_t> run_seed;
  auto* run = app.add_subcommand("run", "Run a scenario script and record a session log");
  run->add_option("--script", script, "Scenario script")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_seed, "Seed (overrides the script)");
  run->add_option("--out", out, "Session log to write")->required();

  std::string replay_log;
  auto* replay = app.add_subcommand("replay", "Re-run a session log and compare telemetry");
  replay->add_option("--log", replay_log, "Session log")->required()->check(CLI::ExistingFile);

  std::vector<std::string> report_logs;
  std::string counts;
  auto* report = app.add_subcommand("report", "Grid coverage table over one or more session logs");
  report->add_option("--log", report_logs, "Session log (repeat for several tests)")->check(CLI::ExistingFile);
  report->add_option("--counts", counts, "Comma-separated sprayed counts instead of logs");

  std::string springs, servos;
  bool json = false;
  auto* design = app.add_subcommand("design-check", "Spring, torque and servo feasibility report");
  design->add_option("--springs", springs, "Tip design file")->required()->check(CLI::ExistingFile);
  design->add_option("--servos", servos, "Servo catalog")->required()->check(CLI::ExistingFile);
  design->add_flag("--json", json, "Emit JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(scene, config, port, realtime, serve_seed, record, bind, max_ticks);
    if (*run) return cmd_run(script, run_seed, out);
    if (*replay) return cmd_replay(replay_log);
    if (*report) return cmd_report(report_logs, counts);
    if (*design) return cmd_design_check(springs, servos, json);
  } catch (const eversim::Error& e) {
    std::cerr << "eversim: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
