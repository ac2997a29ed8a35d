#pragma once

// Teleoperation gateway.
//
// GatewayCore holds all session logic and does no I/O: feed it client lines,
// call step() once per simulation tick, and drain the lines it wants sent.
// The first connected client is the operator; everyone else observes
// (telemetry and events only). When the operator leaves, the next new
// connection takes the operator seat.
//
// Server wraps a core in a single-threaded poll() loop over TCP. Each
// connection is either raw line-delimited JSON or a WebSocket (detected from
// an HTTP GET upgrade), carrying one JSON record per text frame.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eversim/scene.hpp"
#include "eversim/session.hpp"
#include "eversim/sim_config.hpp"
#include "eversim/simulator.hpp"

namespace eversim::gateway {

using ClientId = std::int64_t;

struct Outgoing {
  ClientId client = 0;
  std::string line;  // no trailing newline
};

struct SessionInfo {
  std::string scene_path;
  std::string config_path;
  std::string script_path;
};

class GatewayCore {
 public:
  GatewayCore(std::shared_ptr<const scene::Scene> scene, sim::SimConfig config, std::uint64_t seed,
              SessionInfo info = {});

  // Queues the hello for the new client.
  ClientId connect();
  void disconnect(ClientId client);
  // One wire record. Replies (error, warning) go to the sender only.
  void receive_line(ClientId client, std::string_view line);
  // One simulation tick; telemetry (when due) and events are broadcast.
  void step();
  std::vector<Outgoing> drain_output();

  bool is_operator(ClientId client) const noexcept { return operator_ && *operator_ == client; }
  std::size_t client_count() const noexcept { return clients_.size(); }
  const sim::Simulator& simulator() const noexcept { return *sim_; }
  // Header plus every command, frame, event and error so far.
  session::SessionLog session_log() const;

 private:
  struct Client {
    std::optional<std::int64_t> last_seq;
  };

  void send(ClientId client, const proto::Message& message);
  void broadcast_new();

  std::shared_ptr<const scene::Scene> scene_;
  proto::SessionHeader header_;
  std::unique_ptr<sim::Simulator> sim_;
  std::unique_ptr<session::Driver> driver_;
  std::map<ClientId, Client> clients_;
  std::optional<ClientId> operator_;
  ClientId next_id_ = 1;
  std::vector<Outgoing> out_;
};

struct ServerOptions {
  std::string bind_address = "127.0.0.1";
  std::uint16_t port = 0;  // 0: pick a free port
  // Pace ticks to wall clock. Otherwise ticks run as fast as clients drain
  // output, and only while at least one client is connected.
  bool realtime = false;
  std::optional<std::int64_t> max_ticks;
  std::size_t max_pending_bytes = 1 << 20;
};

class Server {
 public:
  // Binds and listens immediately; throws Error on socket failure.
  Server(GatewayCore& core, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  // Returns after stop() or max_ticks.
  void run();
  // Safe from another thread or a signal handler.
  void stop() noexcept { stop_.store(true); }

 private:
  struct Connection;

  void accept_all();
  void read_from(Connection& c);
  void handle_input(Connection& c);
  void flush(Connection& c);
  void queue(Connection& c, std::string_view line);
  void close(Connection& c);

  GatewayCore& core_;
  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::map<ClientId, std::unique_ptr<Connection>> connections_;
};

}  // namespace eversim::gateway
