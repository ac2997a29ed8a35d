#include "eversim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>

#include "eversim/scene.hpp"
#include "eversim/sim_config.hpp"
#include "eversim/simulator.hpp"
#include "eversim/units.hpp"
#include "yaml_util.hpp"

namespace eversim::scenario {

const char* to_string(ScenarioType type) noexcept {
  switch (type) {
    case ScenarioType::target_spray:
      return "target_spray";
    case ScenarioType::spray_grid:
      return "spray_grid";
    case ScenarioType::wall_coverage:
      return "wall_coverage";
  }
  return "?";
}

ScenarioType parse_scenario_type(const std::string& text) {
  if (text == "target_spray") return ScenarioType::target_spray;
  if (text == "spray_grid") return ScenarioType::spray_grid;
  if (text == "wall_coverage") return ScenarioType::wall_coverage;
  throw InputError("unknown scenario '" + text + "' (target_spray, spray_grid, wall_coverage)");
}

namespace {

constexpr const char* kCommandKeys[] = {"set_pressure", "joystick", "spray",     "retract", "estop",
                                        "resume",       "aim_cell", "aim_point", "select_payload"};

ScriptAction parse_action(const detail::YamlDoc& doc, const YAML::Node& item, const std::string& path) {
  std::string key;
  for (const char* k : kCommandKeys) {
    if (item[k]) {
      if (!key.empty()) throw doc.error(item, path, "more than one command (" + key + ", " + k + ")");
      key = k;
    }
  }
  if (key.empty()) throw doc.error(item, path, "no command key");
  const YAML::Node v = item[key];
  const std::string field = path + "." + key;
  if (key == "set_pressure") return proto::CommandKind{proto::SetPressure{doc.as<double>(v, field)}};
  if (key == "joystick") {
    if (!v.IsSequence() || v.size() != 2) throw doc.error(v, field, "expected [x, y]");
    return proto::CommandKind{proto::Joystick{doc.as<double>(v[0], field), doc.as<double>(v[1], field)}};
  }
  if (key == "spray") return proto::CommandKind{proto::Spray{doc.as<bool>(v, field)}};
  if (key == "retract") return proto::CommandKind{proto::Retract{doc.as<double>(v, field)}};
  if (key == "estop") return proto::CommandKind{proto::Estop{}};
  if (key == "resume") return proto::CommandKind{proto::Resume{}};
  if (key == "select_payload") return proto::CommandKind{proto::SelectPayload{doc.as<std::string>(v, field)}};
  if (key == "aim_cell") {
    if (!v.IsSequence() || v.size() != 2) throw doc.error(v, field, "expected [row, col]");
    return AimCell{doc.as<int>(v[0], field), doc.as<int>(v[1], field)};
  }
  return AimPoint{doc.vec3(v, field)};
}

double timing(const detail::YamlDoc& doc, const YAML::Node& node, const char* key, const std::string& path,
              double fallback) {
  const double v = doc.number(node, key, path + "." + key, fallback);
  if (!(v >= 0.0)) throw doc.error(node[key], path + "." + key, "must be >= 0");
  return v;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
  return std::filesystem::absolute(p).lexically_normal().string();
}

void spray_cycle(std::vector<TimedAction>& out, double& t, ScriptAction aim, double settle, double dwell) {
  out.push_back({t, std::move(aim)});
  out.push_back({t + settle, proto::CommandKind{proto::Spray{true}}});
  out.push_back({t + settle + dwell, proto::CommandKind{proto::Spray{false}}});
  t += settle + dwell;
}

}  // namespace

ScenarioScript parse_script(const std::string& text, const std::string& source) {
  detail::YamlDoc doc(text, source);
  doc.expect_format("eversim-script", 1);
  const YAML::Node& root = doc.root();

  ScenarioScript s;
  s.source_path = source;
  if (!source.empty()) s.base_dir = std::filesystem::path(source).parent_path().string();
  s.name = doc.string(root, "name", "name", std::string("unnamed"));
  const YAML::Node type = doc.require(root, "scenario", "scenario");
  try {
    s.type = parse_scenario_type(doc.as<std::string>(type, "scenario"));
  } catch (const InputError& e) {
    throw doc.error(type, "scenario", e.what());
  }
  s.scene_path = doc.string(root, "scene", "scene");
  s.config_path = doc.string(root, "config", "config", std::string());
  if (const YAML::Node seed = root["seed"]) s.seed = doc.as<std::uint64_t>(seed, "seed");
  if (const YAML::Node n = root["noise"]) {
    proto::NoiseSettings noise;
    noise.aim_sigma_deg = doc.number(n, "aim_sigma_deg", "noise.aim_sigma_deg", 0.0);
    noise.actuation_sigma_mm = doc.number(n, "actuation_sigma_mm", "noise.actuation_sigma_mm", 0.0);
    if (noise.aim_sigma_deg < 0.0 || noise.actuation_sigma_mm < 0.0) throw doc.error(n, "noise", "sigmas must be >= 0");
    s.noise = noise;
  }
  if (const YAML::Node stop = root["stop"]) {
    s.max_time_s = doc.number(stop, "max_time_s", "stop.max_time_s", s.max_time_s);
    s.stop_on_success = doc.boolean(stop, "on_success", "stop.on_success", s.stop_on_success);
    if (!(s.max_time_s > 0.0)) throw doc.error(stop, "stop.max_time_s", "must be > 0");
  }

  if (const YAML::Node cmds = root["commands"]) {
    if (!cmds.IsSequence()) throw doc.error(cmds, "commands", "must be a list");
    double last = 0.0;
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const std::string path = "commands[" + std::to_string(i) + "]";
      const YAML::Node item = cmds[i];
      if (!item.IsMap()) throw doc.error(item, path, "must be a mapping");
      const double t = doc.number(item, "t", path + ".t");
      if (!(t >= 0.0)) throw doc.error(item["t"], path + ".t", "must be >= 0");
      if (t < last) throw doc.error(item["t"], path + ".t", "commands must be time-ordered");
      last = t;
      s.commands.push_back({t, parse_action(doc, item, path)});
    }
  }

  if (const YAML::Node r = root["raster"]) {
    RasterSpec spec;
    spec.start_s = timing(doc, r, "start_s", "raster", spec.start_s);
    spec.settle_s = timing(doc, r, "settle_s", "raster", spec.settle_s);
    spec.dwell_s = timing(doc, r, "dwell_s", "raster", spec.dwell_s);
    const std::string order = doc.string(r, "order", "raster.order", std::string("serpentine"));
    if (order != "serpentine" && order != "row_major") {
      throw doc.error(r["order"], "raster.order", "must be serpentine or row_major");
    }
    spec.serpentine = order == "serpentine";
    s.raster = spec;
  }
  if (const YAML::Node w = root["sweep"]) {
    SweepSpec spec;
    spec.start_s = timing(doc, w, "start_s", "sweep", spec.start_s);
    spec.settle_s = timing(doc, w, "settle_s", "sweep", spec.settle_s);
    spec.dwell_s = timing(doc, w, "dwell_s", "sweep", spec.dwell_s);
    spec.directions = doc.integer(w, "directions", "sweep.directions", spec.directions);
    if (spec.directions < 1) throw doc.error(w["directions"], "sweep.directions", "must be >= 1");
    if (const YAML::Node m = w["magnitudes"]) {
      spec.magnitudes = doc.as<std::vector<double>>(m, "sweep.magnitudes");
      for (double v : spec.magnitudes) {
        if (!(v >= 0.0 && v <= 1.0)) throw doc.error(m, "sweep.magnitudes", "values must be in [0, 1]");
      }
    }
    s.sweep = spec;
  }

  if (const YAML::Node targets = root["targets"]) {
    if (!targets.IsSequence()) throw doc.error(targets, "targets", "must be a list of [row, col]");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string path = "targets[" + std::to_string(i) + "]";
      const YAML::Node c = targets[i];
      if (!c.IsSequence() || c.size() != 2) throw doc.error(c, path, "expected [row, col]");
      s.targets.push_back({doc.as<int>(c[0], path), doc.as<int>(c[1], path)});
    }
  }
  s.terminal = doc.string(root, "terminal", "terminal", std::string());
  s.wall_fraction = doc.number(root, "wall_fraction", "wall_fraction", s.wall_fraction);
  if (!(s.wall_fraction > 0.0 && s.wall_fraction <= 1.0)) {
    throw doc.error(root["wall_fraction"], "wall_fraction", "must be in (0, 1]");
  }
  if (s.type == ScenarioType::target_spray && s.targets.empty()) {
    throw doc.error(root, "targets", "target_spray needs at least one target cell");
  }
  return s;
}

ScenarioScript load_script(const std::string& path) { return parse_script(detail::read_text_file(path), path); }

std::vector<TimedAction> expand_schedule(const ScenarioScript& script, int grid_rows, int grid_cols) {
  std::vector<TimedAction> out = script.commands;
  if (script.raster) {
    const auto& r = *script.raster;
    double t = r.start_s;
    for (int row = 0; row < grid_rows; ++row) {
      for (int k = 0; k < grid_cols; ++k) {
        const int col = (r.serpentine && row % 2 == 1) ? grid_cols - 1 - k : k;
        spray_cycle(out, t, AimCell{row, col}, r.settle_s, r.dwell_s);
      }
    }
  }
  if (script.sweep) {
    const auto& w = *script.sweep;
    double t = w.start_s;
    for (double m : w.magnitudes) {
      const int n = m == 0.0 ? 1 : w.directions;
      for (int k = 0; k < n; ++k) {
        const double phi = 2.0 * kPi * k / n;
        spray_cycle(out, t, proto::CommandKind{proto::Joystick{m * std::cos(phi), m * std::sin(phi)}}, w.settle_s,
                    w.dwell_s);
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TimedAction& a, const TimedAction& b) { return a.t_s < b.t_s; });
  return out;
}

RunRecord run_scenario(const ScenarioScript& script, const RunOptions& options) {
  const std::string scene_path = resolve(script.scene_path, script.base_dir);
  const std::string config_path = resolve(script.config_path, script.base_dir);
  auto scene = std::make_shared<scene::Scene>(scene::load_scene(scene_path));
  sim::SimConfig config;
  if (!config_path.empty()) config = sim::load_sim_config(config_path);
  if (script.noise) config.noise = *script.noise;
  if (options.noise) config.noise = *options.noise;
  const std::uint64_t seed = options.seed.value_or(script.seed);

  const std::string where = script.source_path;
  const spray::TargetGrid* grid = scene->grid ? &*scene->grid : nullptr;
  if (!grid && (script.raster || script.type != ScenarioType::wall_coverage)) {
    throw LoadError(where, 0, "scene", "scenario needs a scene with a target grid");
  }
  for (const auto& c : script.targets) {
    if (c.row < 0 || c.col < 0 || c.row >= grid->rows || c.col >= grid->cols) {
      throw LoadError(where, 0, "targets", "cell [" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                                               "] is outside the grid");
    }
  }
  int terminal = -1;
  if (script.type == ScenarioType::wall_coverage) {
    if (scene->terminals.empty()) throw LoadError(where, 0, "scene", "wall_coverage needs a terminal box");
    terminal = 0;
    if (!script.terminal.empty()) {
      terminal = -1;
      for (std::size_t i = 0; i < scene->terminals.size(); ++i) {
        if (scene->terminals[i].id == script.terminal) terminal = static_cast<int>(i);
      }
      if (terminal < 0) throw LoadError(where, 0, "terminal", "no terminal '" + script.terminal + "' in scene");
    }
  }

  RunRecord rec;
  auto& header = rec.log.header;
  header.version = session::kVersion;
  header.scene_path = scene_path;
  header.config_path = config_path;
  header.seed = seed;
  header.noise = config.noise;
  header.config_hash = session::config_hash(scene->source_text, config.source_text, config.noise, seed);
  header.script_path = script.source_path.empty() ? std::string() : resolve(script.source_path, {});

  sim::Simulator sim(scene, config, seed);
  session::Driver driver(sim);
  const auto schedule = expand_schedule(script, grid ? grid->rows : 0, grid ? grid->cols : 0);
  const double dt = config.dt_s;
  const auto tick_of = [dt](double t) { return static_cast<std::int64_t>(std::llround(t / dt)); };
  const std::int64_t max_ticks = tick_of(script.max_time_s);

  const auto succeeded = [&]() {
    if (script.type == ScenarioType::target_spray) {
      const auto* cov = sim.grid_coverage();
      return std::all_of(script.targets.begin(), script.targets.end(),
                         [&](const AimCell& c) { return cov->hit(grid->index(c.row, c.col)); });
    }
    if (script.type == ScenarioType::wall_coverage) {
      const auto& walls = sim.wall_coverage()[static_cast<std::size_t>(terminal)];
      return std::all_of(walls.begin(), walls.end(),
                         [&](const spray::CoverageMap& w) { return w.fraction() >= script.wall_fraction - 1e-12; });
    }
    return false;
  };

  std::size_t next = 0;
  std::int64_t seq = 0;
  for (std::int64_t t = 0; t < max_ticks; ++t) {
    while (next < schedule.size() && tick_of(schedule[next].t_s) <= t) {
      const auto& action = schedule[next++].action;
      proto::CommandKind kind;
      if (const auto* k = std::get_if<proto::CommandKind>(&action)) {
        kind = *k;
      } else {
        Eigen::Vector3d target;
        if (const auto* c = std::get_if<AimCell>(&action)) {
          if (!grid || c->row < 0 || c->col < 0 || c->row >= grid->rows || c->col >= grid->cols) {
            throw LoadError(where, 0, "aim_cell", "cell is outside the grid");
          }
          target = grid->cell_center(c->row, c->col);
        } else {
          target = std::get<AimPoint>(action).point;
        }
        const auto js = tip::bend_to_joystick(sim.aim_bend(target), config.geometry);
        kind = proto::Joystick{std::clamp(js[0], -1.0, 1.0), std::clamp(js[1], -1.0, 1.0)};
      }
      driver.apply({++seq, static_cast<std::int64_t>(std::llround(sim.sim_time_s() * 1000.0)), kind, std::nullopt});
    }
    driver.step();
    if (!rec.success && succeeded()) {
      rec.success = true;
      rec.success_tick = sim.tick_index();
      driver.record(proto::EventRecord{sim.tick_index(), sim.sim_time_s(), "success", to_string(script.type), {}});
      if (script.stop_on_success) break;
    }
  }
  rec.log.records = driver.records();

  if (const auto* cov = sim.grid_coverage()) {
    rec.grid_hits = cov->hit_count();
    rec.grid_cells = cov->cell_count();
    const int counts[] = {rec.grid_hits};
    rec.coverage = spray::coverage_stats(counts, rec.grid_cells);
  }
  if (terminal >= 0) {
    for (const auto& w : sim.wall_coverage()[static_cast<std::size_t>(terminal)]) rec.wall_fractions.push_back(w.fraction());
  }
  return rec;
}

}  // namespace eversim::scenario
