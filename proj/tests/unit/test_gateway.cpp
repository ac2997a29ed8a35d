#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <thread>

#include "eversim/gateway.hpp"
#include "eversim/websocket.hpp"

using namespace eversim;
using namespace eversim::gateway;

namespace {

std::shared_ptr<const scene::Scene> grid_scene() {
  return std::make_shared<const scene::Scene>(
      scene::load_scene(std::string(EVERSIM_DATA_DIR) + "/scenes/grid_box.yaml"));
}

std::vector<proto::Message> for_client(const std::vector<Outgoing>& out, ClientId id) {
  std::vector<proto::Message> r;
  for (const auto& o : out) {
    if (o.client == id) r.push_back(*proto::decode(o.line));
  }
  return r;
}

std::string cmd(std::int64_t seq, const proto::CommandKind& k) {
  return proto::encode(proto::CommandMessage{seq, 0, k, std::nullopt});
}

// Blocking TCP client with a receive timeout.
class Client {
 public:
  explicit Client(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    timeval tv{5, 0};
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(port);
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&a), sizeof a) != 0) throw std::runtime_error("connect");
  }
  ~Client() { ::close(fd_); }
  void send(const std::string& s) { ASSERT_EQ(::send(fd_, s.data(), s.size(), 0), static_cast<ssize_t>(s.size())); }
  // Reads more bytes into buf; false on timeout or close.
  bool fill() {
    char tmp[4096];
    const ssize_t n = ::recv(fd_, tmp, sizeof tmp, 0);
    if (n <= 0) return false;
    buf.append(tmp, static_cast<std::size_t>(n));
    return true;
  }
  std::optional<std::string> line() {
    for (;;) {
      const auto nl = buf.find('\n');
      if (nl != std::string::npos) {
        std::string l = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        return l;
      }
      if (!fill()) return std::nullopt;
    }
  }
  std::optional<ws::Frame> frame() {
    for (;;) {
      if (auto f = ws::take_frame(buf)) return f;
      if (!fill()) return std::nullopt;
    }
  }
  std::string buf;

 private:
  int fd_ = -1;
};

}  // namespace

TEST(GatewayCore, FirstClientOperatesOthersObserve) {
  GatewayCore core(grid_scene(), {}, 1);
  const auto a = core.connect();
  const auto b = core.connect();
  EXPECT_TRUE(core.is_operator(a));
  EXPECT_FALSE(core.is_operator(b));
  const auto out = core.drain_output();
  EXPECT_EQ(std::get<proto::Hello>(for_client(out, a)[0]).role, "operator");
  EXPECT_EQ(std::get<proto::Hello>(for_client(out, b)[0]).role, "observer");

  core.receive_line(b, cmd(1, proto::SetPressure{40}));
  const auto replies = for_client(core.drain_output(), b);
  ASSERT_EQ(replies.size(), 1u);
  EXPECT_EQ(std::get<proto::ErrorReply>(replies[0]).field, "type");
  EXPECT_EQ(core.simulator().eversion().target_pressure_kpa, 0.0);
}

TEST(GatewayCore, OperatorSeatPassesToNextConnection) {
  GatewayCore core(grid_scene(), {}, 1);
  const auto a = core.connect();
  const auto b = core.connect();
  core.disconnect(a);
  EXPECT_FALSE(core.is_operator(b));
  const auto c = core.connect();
  EXPECT_TRUE(core.is_operator(c));
  EXPECT_EQ(core.client_count(), 2u);
}

TEST(GatewayCore, StaleSeqDropped) {
  GatewayCore core(grid_scene(), {}, 1);
  const auto a = core.connect();
  core.drain_output();
  core.receive_line(a, cmd(5, proto::SetPressure{40}));
  core.receive_line(a, cmd(5, proto::SetPressure{90}));
  core.receive_line(a, cmd(3, proto::SetPressure{90}));
  const auto out = for_client(core.drain_output(), a);
  int warnings = 0;
  for (const auto& m : out) warnings += std::holds_alternative<proto::Warning>(m);
  EXPECT_EQ(warnings, 2);
  EXPECT_EQ(core.simulator().eversion().target_pressure_kpa, 40.0);
}

TEST(GatewayCore, MalformedAndBlankLines) {
  GatewayCore core(grid_scene(), {}, 1);
  const auto a = core.connect();
  core.drain_output();
  core.receive_line(a, "{\"type\":\"command\",\"seq\":1,\"ts\":0,\"kind\":\"joystick\",\"x\":3,\"y\":0}");
  core.receive_line(a, "");
  core.receive_line(a, "not json");
  const auto out = for_client(core.drain_output(), a);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(std::get<proto::ErrorReply>(out[0]).field, "x");
  EXPECT_EQ(std::get<proto::Warning>(out[1]).message, "empty line skipped");
  EXPECT_TRUE(std::holds_alternative<proto::ErrorReply>(out[2]));
  // Rejected-by-simulator commands are answered with the field too.
  core.receive_line(a, cmd(2, proto::Retract{3.0}));
  const auto r = for_client(core.drain_output(), a);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(std::get<proto::ErrorReply>(r[0]).field, "length_m");
  EXPECT_EQ(std::get<proto::ErrorReply>(r[0]).seq, 2);
}

TEST(GatewayCore, TelemetryBroadcastToAll) {
  GatewayCore core(grid_scene(), {}, 1);
  const auto a = core.connect();
  const auto b = core.connect();
  core.drain_output();
  for (int i = 0; i < 10; ++i) core.step();
  const auto out = core.drain_output();
  const auto fa = for_client(out, a), fb = for_client(out, b);
  EXPECT_EQ(fa, fb);
  int frames = 0;
  for (const auto& m : fa) frames += std::holds_alternative<proto::TelemetryFrame>(m);
  EXPECT_EQ(frames, 2);
}

TEST(GatewayCore, SessionLogReplays) {
  const std::string scene_path = std::string(EVERSIM_DATA_DIR) + "/scenes/grid_box.yaml";
  GatewayCore core(grid_scene(), {}, 4, {scene_path, "", ""});
  const auto a = core.connect();
  core.receive_line(a, cmd(1, proto::SetPressure{40}));
  for (int i = 0; i < 100; ++i) core.step();
  core.receive_line(a, cmd(2, proto::Joystick{0.3, -0.2}));
  core.receive_line(a, cmd(3, proto::Spray{true}));
  for (int i = 0; i < 200; ++i) core.step();
  const auto log = core.session_log();
  EXPECT_EQ(log.commands().size(), 3u);
  const auto r = session::replay(log);
  EXPECT_TRUE(r.identical) << r.diagnostic;
  EXPECT_EQ(r.frames.size(), 60u);
}

TEST(GatewayServer, RawTcpSession) {
  GatewayCore core(grid_scene(), {}, 1);
  Server server(core, {});
  std::thread t([&] { server.run(); });
  {
    Client c(server.port());
    const auto hello = c.line();
    ASSERT_TRUE(hello);
    EXPECT_EQ(std::get<proto::Hello>(*proto::decode(*hello)).role, "operator");
    c.send(cmd(1, proto::SetPressure{40}) + "\n");
    double pressure = 0.0;
    for (int i = 0; i < 400 && pressure <= 0.0; ++i) {
      const auto l = c.line();
      ASSERT_TRUE(l);
      const auto m = proto::decode(*l);
      if (const auto* f = std::get_if<proto::TelemetryFrame>(&*m)) pressure = f->pressure_kpa;
    }
    EXPECT_GT(pressure, 0.0);
  }
  server.stop();
  t.join();
}

TEST(GatewayServer, WebSocketSession) {
  GatewayCore core(grid_scene(), {}, 1);
  Server server(core, {});
  std::thread t([&] { server.run(); });
  {
    Client c(server.port());
    c.send(
        "GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
        "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    while (c.buf.find("\r\n\r\n") == std::string::npos) ASSERT_TRUE(c.fill());
    const auto head_end = c.buf.find("\r\n\r\n") + 4;
    const auto head = c.buf.substr(0, head_end);
    c.buf.erase(0, head_end);
    EXPECT_EQ(head.rfind("HTTP/1.1 101", 0), 0u);
    EXPECT_NE(head.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo="), std::string::npos);

    const auto hello = c.frame();
    ASSERT_TRUE(hello);
    EXPECT_EQ(std::get<proto::Hello>(*proto::decode(hello->payload)).role, "operator");
    c.send(ws::encode_frame(ws::Opcode::text, cmd(1, proto::SetPressure{40}), 0x11223344u));
    double pressure = 0.0;
    for (int i = 0; i < 400 && pressure <= 0.0; ++i) {
      const auto f = c.frame();
      ASSERT_TRUE(f);
      ASSERT_EQ(f->opcode, ws::Opcode::text);
      const auto m = proto::decode(f->payload);
      if (const auto* tf = std::get_if<proto::TelemetryFrame>(&*m)) pressure = tf->pressure_kpa;
    }
    EXPECT_GT(pressure, 0.0);
  }
  server.stop();
  t.join();
}

TEST(GatewayServer, MaxTicksEndsRun) {
  GatewayCore core(grid_scene(), {}, 1);
  ServerOptions o;
  o.max_ticks = 50;
  Server server(core, o);
  std::thread t([&] { server.run(); });
  Client c(server.port());
  while (c.line()) {
  }
  t.join();
  EXPECT_EQ(core.simulator().tick_index(), 50);
}
