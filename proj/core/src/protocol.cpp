#include "eversim/protocol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "eversim/error.hpp"

namespace eversim::proto {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json encode_command(const CommandMessage& c) {
  json j = {{"type", "command"}, {"seq", c.seq}, {"ts", c.timestamp_ms}};
  if (c.tick) j["tick"] = *c.tick;
  j["kind"] = kind_name(c.kind);
  std::visit(overloaded{
                 [&](const Joystick& k) {
                   j["x"] = k.x;
                   j["y"] = k.y;
                 },
                 [&](const SetPressure& k) { j["kpa"] = k.kpa; },
                 [&](const Spray& k) { j["on"] = k.on; },
                 [&](const Retract& k) { j["length_m"] = k.length_m; },
                 [&](const Estop&) {},
                 [&](const Resume&) {},
                 [&](const SelectPayload& k) { j["id"] = k.id; },
             },
             c.kind);
  return j;
}

json encode_telemetry(const TelemetryFrame& f) {
  json j = {{"type", "telemetry"},
            {"seq", f.seq},
            {"tick", f.tick},
            {"sim_time", f.sim_time_s},
            {"everted_length", f.everted_length_m},
            {"pressure", f.pressure_kpa},
            {"target_pressure", f.target_pressure_kpa},
            {"tip", {{"position", f.tip_position}, {"heading", f.tip_heading}}},
            {"bend", {{"magnitude", f.bend_magnitude_deg}, {"direction", f.bend_direction_deg}}},
            {"servo_angles", f.servo_angles_deg},
            {"status", f.status},
            {"estopped", f.estopped},
            {"spray", f.spray_on},
            {"payload", f.payload},
            {"segment", f.segment}};
  if (f.coverage) {
    j["coverage"] = {{"hit", f.coverage->hit}, {"total", f.coverage->total}, {"percent", f.coverage->percent}};
  }
  if (f.pov) {
    j["pov"] = {{"rows", f.pov->rows},
                {"cols", f.pov->cols},
                {"hits", f.pov->hits},
                {"visible", f.pov->visible},
                {"uv", f.pov->uv}};
  }
  return j;
}

json optional_seq(const std::optional<std::int64_t>& seq) { return seq ? json(*seq) : json(nullptr); }

// Strict field access; every failure names the field.
class Reader {
 public:
  explicit Reader(const json& j, std::string prefix = {}) : j_(j), prefix_(std::move(prefix)) {}

  const json& at(const std::string& key) const {
    const auto it = j_.find(key);
    if (it == j_.end()) throw DecodeError(name(key), "missing field");
    return *it;
  }
  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw DecodeError(name(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DecodeError(name(key), "must be finite");
    return d;
  }
  std::int64_t integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw DecodeError(name(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw DecodeError(name(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw DecodeError(name(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw DecodeError(name(key), "expected a string");
    return v.get<std::string>();
  }
  template <std::size_t N>
  std::array<double, N> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array() || v.size() != N) throw DecodeError(name(key), "expected " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number()) throw DecodeError(name(key), "expected numbers");
      out[i] = v[i].get<double>();
    }
    return out;
  }
  std::optional<std::int64_t> optional_integer(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return integer(key);
  }
  Reader object(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_object()) throw DecodeError(name(key), "expected an object");
    return Reader(v, name(key) + ".");
  }

 private:
  std::string name(const std::string& key) const { return prefix_ + key; }

  const json& j_;
  std::string prefix_;
};

CommandMessage decode_command(const Reader& r) {
  CommandMessage c;
  c.seq = r.integer("seq");
  if (c.seq < 0) throw DecodeError("seq", "must be >= 0");
  c.timestamp_ms = r.has("ts") ? r.integer("ts") : 0;
  c.tick = r.optional_integer("tick");
  const std::string kind = r.string("kind");
  if (kind == "joystick") {
    Joystick k{r.number("x"), r.number("y")};
    if (k.x < -1.0 || k.x > 1.0) throw DecodeError("x", "must be in [-1, 1]");
    if (k.y < -1.0 || k.y > 1.0) throw DecodeError("y", "must be in [-1, 1]");
    c.kind = k;
  } else if (kind == "set_pressure") {
    SetPressure k{r.number("kpa")};
    if (k.kpa < 0.0) throw DecodeError("kpa", "must be >= 0");
    c.kind = k;
  } else if (kind == "spray") {
    c.kind = Spray{r.boolean("on")};
  } else if (kind == "retract") {
    Retract k{r.number("length_m")};
    if (k.length_m < 0.0) throw DecodeError("length_m", "must be >= 0");
    c.kind = k;
  } else if (kind == "estop") {
    c.kind = Estop{};
  } else if (kind == "resume") {
    c.kind = Resume{};
  } else if (kind == "select_payload") {
    c.kind = SelectPayload{r.string("id")};
  } else {
    throw DecodeError("kind", "unknown command kind '" + kind + "'");
  }
  return c;
}

TelemetryFrame decode_telemetry(const Reader& r) {
  TelemetryFrame f;
  f.seq = r.integer("seq");
  f.tick = r.integer("tick");
  f.sim_time_s = r.number("sim_time");
  f.everted_length_m = r.number("everted_length");
  f.pressure_kpa = r.number("pressure");
  f.target_pressure_kpa = r.number("target_pressure");
  const Reader tip = r.object("tip");
  f.tip_position = tip.numbers<3>("position");
  f.tip_heading = tip.numbers<3>("heading");
  const Reader bend = r.object("bend");
  f.bend_magnitude_deg = bend.number("magnitude");
  f.bend_direction_deg = bend.number("direction");
  f.servo_angles_deg = r.numbers<4>("servo_angles");
  f.status = r.string("status");
  f.estopped = r.boolean("estopped");
  f.spray_on = r.boolean("spray");
  f.payload = r.string("payload");
  f.segment = r.string("segment");
  if (r.has("coverage")) {
    const Reader c = r.object("coverage");
    f.coverage = CoverageSnapshot{static_cast<int>(c.integer("hit")), static_cast<int>(c.integer("total")),
                                  c.number("percent")};
  }
  if (r.has("pov")) {
    const Reader p = r.object("pov");
    PovView v;
    v.rows = static_cast<int>(p.integer("rows"));
    v.cols = static_cast<int>(p.integer("cols"));
    v.hits = p.string("hits");
    v.visible = p.string("visible");
    const json& uv = p.at("uv");
    if (!uv.is_array()) throw DecodeError("pov.uv", "expected an array");
    for (const auto& x : uv) {
      if (!x.is_number()) throw DecodeError("pov.uv", "expected numbers");
      v.uv.push_back(x.get<double>());
    }
    const auto cells = static_cast<std::size_t>(v.rows * v.cols);
    if (v.hits.size() != cells || v.visible.size() != cells || v.uv.size() != 2 * cells) {
      throw DecodeError("pov", "cell arrays do not match rows x cols");
    }
    f.pov = std::move(v);
  }
  return f;
}

}  // namespace

const char* kind_name(const CommandKind& kind) noexcept {
  return std::visit(overloaded{
                        [](const Joystick&) { return "joystick"; },
                        [](const SetPressure&) { return "set_pressure"; },
                        [](const Spray&) { return "spray"; },
                        [](const Retract&) { return "retract"; },
                        [](const Estop&) { return "estop"; },
                        [](const Resume&) { return "resume"; },
                        [](const SelectPayload&) { return "select_payload"; },
                    },
                    kind);
}

std::string encode(const Message& message) {
  const json j = std::visit(
      overloaded{
          [](const Hello& h) {
            return json{{"type", "hello"}, {"protocol", h.protocol}, {"role", h.role}, {"scene", h.scene}};
          },
          [](const CommandMessage& c) { return encode_command(c); },
          [](const TelemetryFrame& f) { return encode_telemetry(f); },
          [](const EventRecord& e) {
            return json{{"type", "event"},   {"tick", e.tick},     {"sim_time", e.sim_time_s},
                        {"event", e.event},  {"detail", e.detail}, {"cells", e.cells}};
          },
          [](const ErrorReply& e) {
            return json{{"type", "error"}, {"field", e.field}, {"message", e.message}, {"seq", optional_seq(e.seq)}};
          },
          [](const Warning& w) {
            return json{{"type", "warning"}, {"message", w.message}, {"seq", optional_seq(w.seq)}};
          },
          [](const SessionHeader& h) {
            return json{{"type", "session"},
                        {"protocol", h.protocol},
                        {"version", h.version},
                        {"scene", h.scene_path},
                        {"config", h.config_path},
                        {"seed", h.seed},
                        {"noise", {{"aim_sigma_deg", h.noise.aim_sigma_deg},
                                   {"actuation_sigma_mm", h.noise.actuation_sigma_mm}}},
                        {"config_hash", h.config_hash},
                        {"script", h.script_path}};
          },
      },
      message);
  return j.dump();
}

std::optional<Message> decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  if (line.find_first_not_of(" \t") == std::string_view::npos) return std::nullopt;

  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DecodeError("", std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw DecodeError("", "record must be a JSON object");
  const Reader r(j);
  const std::string type = r.string("type");

  try {
    if (type == "command") return Message{decode_command(r)};
    if (type == "telemetry") return Message{decode_telemetry(r)};
    if (type == "hello") {
      Hello h;
      h.protocol = static_cast<int>(r.integer("protocol"));
      h.role = r.has("role") ? r.string("role") : std::string();
      h.scene = r.has("scene") ? r.string("scene") : std::string();
      return Message{h};
    }
    if (type == "event") {
      EventRecord e;
      e.tick = r.integer("tick");
      e.sim_time_s = r.number("sim_time");
      e.event = r.string("event");
      e.detail = r.has("detail") ? r.string("detail") : std::string();
      if (r.has("cells")) {
        const json& cells = r.at("cells");
        if (!cells.is_array()) throw DecodeError("cells", "expected an array");
        for (const auto& c : cells) {
          if (!c.is_number_integer()) throw DecodeError("cells", "expected integers");
          e.cells.push_back(c.get<int>());
        }
      }
      return Message{e};
    }
    if (type == "error") {
      return Message{ErrorReply{r.has("field") ? r.string("field") : std::string(), r.string("message"),
                                r.optional_integer("seq")}};
    }
    if (type == "warning") return Message{Warning{r.string("message"), r.optional_integer("seq")}};
    if (type == "session") {
      SessionHeader h;
      h.protocol = static_cast<int>(r.integer("protocol"));
      h.version = r.string("version");
      h.scene_path = r.string("scene");
      h.config_path = r.has("config") ? r.string("config") : std::string();
      h.seed = r.unsigned_integer("seed");
      const Reader n = r.object("noise");
      h.noise.aim_sigma_deg = n.number("aim_sigma_deg");
      h.noise.actuation_sigma_mm = n.number("actuation_sigma_mm");
      h.config_hash = r.string("config_hash");
      h.script_path = r.has("script") ? r.string("script") : std::string();
      return Message{h};
    }
  } catch (const json::exception& e) {
    throw DecodeError("", std::string("malformed record: ") + e.what());
  }
  throw DecodeError("type", "unknown record type '" + type + "'");
}

}  // namespace eversim::proto
