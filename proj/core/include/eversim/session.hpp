#pragma once

// Session logs: a `session` header line followed by protocol records
// (commands stamped with the tick they were applied before, telemetry frames,
// events, error replies), one JSON object per line.
//
// Replay rebuilds the simulator from the header, re-applies the recorded
// commands at their ticks and regenerates telemetry. The header carries a
// hash over the scene text, config text, noise settings and seed; replay
// refuses when the files on disk or the seed no longer hash the same.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eversim/error.hpp"
#include "eversim/protocol.hpp"
#include "eversim/simulator.hpp"
#include "eversim/spray.hpp"

namespace eversim::session {

inline constexpr const char* kVersion = "eversim-0.1";

class ReplayRefused : public Error {
 public:
  using Error::Error;
};

// FNV-1a 64 over the inputs that determine a run, as 16 lowercase hex digits.
std::string config_hash(const std::string& scene_text, const std::string& config_text,
                        const proto::NoiseSettings& noise, std::uint64_t seed);

struct SessionLog {
  proto::SessionHeader header;
  std::vector<proto::Message> records;

  std::vector<proto::TelemetryFrame> frames() const;
  std::vector<proto::EventRecord> events() const;
  std::vector<proto::CommandMessage> commands() const;
};

// Steps a simulator and records everything it produces, in order.
class Driver {
 public:
  explicit Driver(sim::Simulator& sim) : sim_(sim) {}

  // Applies before the next tick. Rejected commands are still recorded,
  // followed by the error reply, which is also returned.
  std::optional<proto::ErrorReply> apply(proto::CommandMessage command);
  // Telemetry (when due), one tick, then the events it raised.
  void step();
  void record(proto::Message message);

  sim::Simulator& sim() noexcept { return sim_; }
  const std::vector<proto::Message>& records() const noexcept { return records_; }
  // Records added since the last call; the full list is kept.
  std::vector<proto::Message> take_new();

 private:
  void collect_events();

  sim::Simulator& sim_;
  std::vector<proto::Message> records_;
  std::size_t taken_ = 0;
};

void write_session_log(std::ostream& out, const SessionLog& log);
void save_session_log(const std::string& path, const SessionLog& log);
// Throws LoadError with the line number of the first bad record.
SessionLog read_session_log(std::istream& in, const std::string& source = {});
SessionLog load_session_log(const std::string& path);

struct ReplayResult {
  std::vector<proto::TelemetryFrame> frames;
  bool identical = false;
  // First frame index that differs (or the shorter length when only counts differ).
  std::optional<std::size_t> first_mismatch;
  std::string diagnostic;
  std::optional<spray::CoverageMap> grid_coverage;
};

// Scene/config paths in the header are resolved relative to `base_dir`
// when they are relative. Throws ReplayRefused on a hash mismatch.
ReplayResult replay(const SessionLog& log, const std::string& base_dir = {});

// Grid cells hit over the whole log, from its cells_hit events.
int grid_hit_count(const SessionLog& log);
// Grid size from the last telemetry frame with coverage; 60 when absent.
int grid_cell_total(const SessionLog& log);

}  // namespace eversim::session
