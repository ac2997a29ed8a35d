#include "eversim/session.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "eversim/scene.hpp"
#include "eversim/sim_config.hpp"

namespace eversim::session {

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void text(const std::string& s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void number(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    bytes(&bits, sizeof bits);
  }
  void integer(std::uint64_t v) { bytes(&v, sizeof v); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

std::string config_hash(const std::string& scene_text, const std::string& config_text,
                        const proto::NoiseSettings& noise, std::uint64_t seed) {
  Fnv1a h;
  h.text(kVersion);
  h.text(scene_text);
  h.text(config_text);
  h.number(noise.aim_sigma_deg);
  h.number(noise.actuation_sigma_mm);
  h.integer(seed);
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h.value();
  return out.str();
}

std::vector<proto::TelemetryFrame> SessionLog::frames() const {
  std::vector<proto::TelemetryFrame> out;
  for (const auto& m : records) {
    if (const auto* f = std::get_if<proto::TelemetryFrame>(&m)) out.push_back(*f);
  }
  return out;
}

std::vector<proto::EventRecord> SessionLog::events() const {
  std::vector<proto::EventRecord> out;
  for (const auto& m : records) {
    if (const auto* e = std::get_if<proto::EventRecord>(&m)) out.push_back(*e);
  }
  return out;
}

std::vector<proto::CommandMessage> SessionLog::commands() const {
  std::vector<proto::CommandMessage> out;
  for (const auto& m : records) {
    if (const auto* c = std::get_if<proto::CommandMessage>(&m)) out.push_back(*c);
  }
  return out;
}

std::optional<proto::ErrorReply> Driver::apply(proto::CommandMessage command) {
  command.tick = sim_.tick_index();
  const auto seq = command.seq;
  const auto kind = command.kind;
  records_.emplace_back(std::move(command));
  try {
    sim_.apply(kind);
  } catch (const sim::CommandRejected& e) {
    proto::ErrorReply reply{e.field(), e.what(), seq};
    records_.emplace_back(reply);
    return reply;
  }
  collect_events();
  return std::nullopt;
}

void Driver::step() {
  if (sim_.telemetry_due()) records_.emplace_back(sim_.telemetry());
  sim_.tick();
  collect_events();
}

void Driver::record(proto::Message message) { records_.push_back(std::move(message)); }

void Driver::collect_events() {
  for (auto& e : sim_.take_events()) records_.emplace_back(std::move(e));
}

std::vector<proto::Message> Driver::take_new() {
  std::vector<proto::Message> out(records_.begin() + static_cast<std::ptrdiff_t>(taken_), records_.end());
  taken_ = records_.size();
  return out;
}

void write_session_log(std::ostream& out, const SessionLog& log) {
  out << proto::encode(log.header) << '\n';
  for (const auto& m : log.records) out << proto::encode(m) << '\n';
}

void save_session_log(const std::string& path, const SessionLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path, 0, "", "cannot open for writing");
  write_session_log(out, log);
  if (!out) throw LoadError(path, 0, "", "write failed");
}

SessionLog read_session_log(std::istream& in, const std::string& source) {
  SessionLog log;
  bool have_header = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::optional<proto::Message> m;
    try {
      m = proto::decode(line);
    } catch (const DecodeError& e) {
      throw LoadError(source, line_no, e.field(), e.what());
    }
    if (!m) continue;
    if (!have_header) {
      const auto* h = std::get_if<proto::SessionHeader>(&*m);
      if (h == nullptr) throw LoadError(source, line_no, "type", "first record must be the session header");
      log.header = *h;
      have_header = true;
      continue;
    }
    if (std::holds_alternative<proto::SessionHeader>(*m)) {
      throw LoadError(source, line_no, "type", "duplicate session header");
    }
    log.records.push_back(std::move(*m));
  }
  if (!have_header) throw LoadError(source, line_no, "type", "empty log: no session header");
  return log;
}

SessionLog load_session_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path, 0, "", "cannot open");
  return read_session_log(in, path);
}

ReplayResult replay(const SessionLog& log, const std::string& base_dir) {
  const auto& h = log.header;
  if (h.protocol != proto::kProtocolVersion) {
    throw ReplayRefused("log uses protocol " + std::to_string(h.protocol) + ", this build speaks " +
                        std::to_string(proto::kProtocolVersion));
  }
  const std::string scene_path = resolve(h.scene_path, base_dir);
  auto scene = std::make_shared<scene::Scene>(scene::load_scene(scene_path));
  sim::SimConfig config;
  if (!h.config_path.empty()) config = sim::load_sim_config(resolve(h.config_path, base_dir));
  const std::string hash = config_hash(scene->source_text, config.source_text, h.noise, h.seed);
  if (hash != h.config_hash) {
    throw ReplayRefused("config hash mismatch: log has " + h.config_hash + ", current scene/config/noise/seed hash to " +
                        hash);
  }
  config.noise = h.noise;

  const auto recorded = log.frames();
  ReplayResult result;
  sim::Simulator sim(scene, config, h.seed);
  const auto commands = log.commands();
  std::size_t next = 0;
  const std::int64_t last_tick = recorded.empty() ? -1 : recorded.back().tick;
  for (std::int64_t t = 0; t <= last_tick; ++t) {
    while (next < commands.size() && commands[next].tick.value_or(0) <= t) {
      try {
        sim.apply(commands[next].kind);
      } catch (const sim::CommandRejected&) {
      }
      ++next;
    }
    if (sim.telemetry_due()) result.frames.push_back(sim.telemetry());
    sim.tick();
    sim.take_events();
  }
  if (sim.grid_coverage()) result.grid_coverage = *sim.grid_coverage();

  const std::size_t n = std::min(recorded.size(), result.frames.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (proto::encode(recorded[i]) != proto::encode(result.frames[i])) {
      result.first_mismatch = i;
      result.diagnostic = "frame " + std::to_string(i) + " (tick " + std::to_string(recorded[i].tick) + ") differs";
      break;
    }
  }
  if (!result.first_mismatch && recorded.size() != result.frames.size()) {
    result.first_mismatch = n;
    result.diagnostic = "recorded " + std::to_string(recorded.size()) + " frames, regenerated " +
                        std::to_string(result.frames.size());
  }
  result.identical = !result.first_mismatch;
  return result;
}

int grid_hit_count(const SessionLog& log) {
  std::set<int> cells;
  for (const auto& e : log.events()) {
    if (e.event == "cells_hit") cells.insert(e.cells.begin(), e.cells.end());
  }
  return static_cast<int>(cells.size());
}

int grid_cell_total(const SessionLog& log) {
  const auto frames = log.frames();
  for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
    if (it->coverage) return it->coverage->total;
  }
  return 60;
}

}  // namespace eversim::session
