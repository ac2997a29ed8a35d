#pragma once

// Operator <-> simulator wire protocol.
//
// One JSON object per line (UTF-8, '\n' terminated), discriminated by "type":
//
//   hello      {"type":"hello","protocol":1,"role":"operator","scene":"..."}
//   command    {"type":"command","seq":7,"ts":1200,"kind":"joystick","x":1.0,"y":0.0}
//                kind = joystick{x,y} | set_pressure{kpa} | spray{on} | retract{length_m}
//                     | estop | resume | select_payload{id}
//              Session logs add "tick": the simulation tick the command was applied before.
//   telemetry  see TelemetryFrame; field names in encode()
//   event      {"type":"event","tick":..,"sim_time":..,"event":"junction","detail":"..","cells":[..]}
//   error      {"type":"error","field":"x","message":"..","seq":7}
//   warning    {"type":"warning","message":"..","seq":7}
//   session    session log header, see session.hpp

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace eversim::proto {

inline constexpr int kProtocolVersion = 1;

struct Joystick {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Joystick&) const = default;
};
struct SetPressure {
  double kpa = 0.0;
  bool operator==(const SetPressure&) const = default;
};
struct Spray {
  bool on = false;
  bool operator==(const Spray&) const = default;
};
struct Retract {
  double length_m = 0.0;
  bool operator==(const Retract&) const = default;
};
struct Estop {
  bool operator==(const Estop&) const = default;
};
struct Resume {
  bool operator==(const Resume&) const = default;
};
struct SelectPayload {
  std::string id;
  bool operator==(const SelectPayload&) const = default;
};

using CommandKind = std::variant<Joystick, SetPressure, Spray, Retract, Estop, Resume, SelectPayload>;

struct CommandMessage {
  std::int64_t seq = 0;
  std::int64_t timestamp_ms = 0;
  CommandKind kind;
  std::optional<std::int64_t> tick;  // only in session logs

  bool operator==(const CommandMessage&) const = default;
};

struct Hello {
  int protocol = kProtocolVersion;
  std::string role;  // operator | observer
  std::string scene;

  bool operator==(const Hello&) const = default;
};

struct CoverageSnapshot {
  int hit = 0;
  int total = 0;
  double percent = 0.0;

  bool operator==(const CoverageSnapshot&) const = default;
};

// Tip-camera view of the target grid: each cell centre projected onto the
// normalised image plane (u right, v up, +-1 at the field-of-view edge).
struct PovView {
  int rows = 0;
  int cols = 0;
  std::string hits;     // '1' per hit cell, row-major
  std::string visible;  // '1' when the cell centre is in front of the camera
  std::vector<double> uv;  // 2 per cell; 0,0 for cells behind the camera

  bool operator==(const PovView&) const = default;
};

struct TelemetryFrame {
  std::int64_t seq = 0;
  std::int64_t tick = 0;
  double sim_time_s = 0.0;
  double everted_length_m = 0.0;
  double pressure_kpa = 0.0;
  double target_pressure_kpa = 0.0;
  std::array<double, 3> tip_position{};
  std::array<double, 3> tip_heading{};
  double bend_magnitude_deg = 0.0;
  double bend_direction_deg = 0.0;
  std::array<double, 4> servo_angles_deg{};
  std::string status;
  bool estopped = false;
  bool spray_on = false;
  std::string payload;
  std::string segment;
  std::optional<CoverageSnapshot> coverage;
  std::optional<PovView> pov;

  bool operator==(const TelemetryFrame&) const = default;
};

struct EventRecord {
  std::int64_t tick = 0;
  double sim_time_s = 0.0;
  std::string event;
  std::string detail;
  std::vector<int> cells;

  bool operator==(const EventRecord&) const = default;
};

struct ErrorReply {
  std::string field;
  std::string message;
  std::optional<std::int64_t> seq;

  bool operator==(const ErrorReply&) const = default;
};

struct Warning {
  std::string message;
  std::optional<std::int64_t> seq;

  bool operator==(const Warning&) const = default;
};

struct NoiseSettings {
  double aim_sigma_deg = 0.0;
  double actuation_sigma_mm = 0.0;

  bool operator==(const NoiseSettings&) const = default;
};

struct SessionHeader {
  int protocol = kProtocolVersion;
  std::string version;
  std::string scene_path;
  std::string config_path;  // empty: built-in defaults
  std::uint64_t seed = 0;
  NoiseSettings noise;
  std::string config_hash;  // 16 hex digits
  std::string script_path;

  bool operator==(const SessionHeader&) const = default;
};

using Message =
    std::variant<Hello, CommandMessage, TelemetryFrame, EventRecord, ErrorReply, Warning, SessionHeader>;

// Single line, no trailing newline.
std::string encode(const Message& message);

// Returns nullopt for a blank line. Throws DecodeError naming the offending
// field, or the kind/type when it is unknown; nothing is partially decoded.
std::optional<Message> decode(std::string_view line);

const char* kind_name(const CommandKind& kind) noexcept;

}  // namespace eversim::proto
