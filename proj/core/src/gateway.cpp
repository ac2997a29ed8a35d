#include "eversim/gateway.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>

#include "eversim/websocket.hpp"

namespace eversim::gateway {

GatewayCore::GatewayCore(std::shared_ptr<const scene::Scene> scene, sim::SimConfig config, std::uint64_t seed,
                         SessionInfo info)
    : scene_(std::move(scene)) {
  if (!scene_) throw InputError("gateway needs a scene");
  header_.version = session::kVersion;
  header_.scene_path = std::move(info.scene_path);
  header_.config_path = std::move(info.config_path);
  header_.script_path = std::move(info.script_path);
  header_.seed = seed;
  header_.noise = config.noise;
  header_.config_hash = session::config_hash(scene_->source_text, config.source_text, config.noise, seed);
  sim_ = std::make_unique<sim::Simulator>(scene_, std::move(config), seed);
  driver_ = std::make_unique<session::Driver>(*sim_);
}

ClientId GatewayCore::connect() {
  const ClientId id = next_id_++;
  clients_.emplace(id, Client{});
  if (!operator_) operator_ = id;
  send(id, proto::Hello{proto::kProtocolVersion, is_operator(id) ? "operator" : "observer", scene_->name});
  return id;
}

void GatewayCore::disconnect(ClientId client) {
  clients_.erase(client);
  if (is_operator(client)) operator_.reset();
}

void GatewayCore::send(ClientId client, const proto::Message& message) {
  out_.push_back({client, proto::encode(message)});
}

void GatewayCore::receive_line(ClientId client, std::string_view line) {
  const auto it = clients_.find(client);
  if (it == clients_.end()) return;
  std::optional<proto::Message> message;
  try {
    message = proto::decode(line);
  } catch (const DecodeError& e) {
    send(client, proto::ErrorReply{e.field(), e.what(), std::nullopt});
    return;
  }
  if (!message) {
    send(client, proto::Warning{"empty line skipped", std::nullopt});
    return;
  }
  if (const auto* hello = std::get_if<proto::Hello>(&*message)) {
    if (hello->protocol != proto::kProtocolVersion) {
      send(client, proto::ErrorReply{"protocol",
                                     "client speaks protocol " + std::to_string(hello->protocol) + ", gateway speaks " +
                                         std::to_string(proto::kProtocolVersion),
                                     std::nullopt});
    }
    return;
  }
  auto* command = std::get_if<proto::CommandMessage>(&*message);
  if (command == nullptr) {
    send(client, proto::ErrorReply{"type", "clients may only send hello or command records", std::nullopt});
    return;
  }
  if (!is_operator(client)) {
    send(client, proto::ErrorReply{"type", "observer connections are read-only", command->seq});
    return;
  }
  auto& last = it->second.last_seq;
  if (last && command->seq <= *last) {
    send(client, proto::Warning{"stale seq " + std::to_string(command->seq) + " (last " + std::to_string(*last) +
                                    "); dropped",
                                command->seq});
    return;
  }
  last = command->seq;
  command->tick.reset();
  if (auto reply = driver_->apply(std::move(*command))) send(client, *reply);
  broadcast_new();
}

void GatewayCore::step() {
  driver_->step();
  broadcast_new();
}

void GatewayCore::broadcast_new() {
  for (const auto& m : driver_->take_new()) {
    if (!std::holds_alternative<proto::TelemetryFrame>(m) && !std::holds_alternative<proto::EventRecord>(m)) continue;
    const std::string line = proto::encode(m);
    for (const auto& [id, client] : clients_) out_.push_back({id, line});
  }
}

std::vector<Outgoing> GatewayCore::drain_output() {
  std::vector<Outgoing> out;
  out.swap(out_);
  return out;
}

session::SessionLog GatewayCore::session_log() const { return {header_, driver_->records()}; }

// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kMaxLine = 1 << 20;
constexpr auto kDetectTimeout = std::chrono::milliseconds(100);

void set_nonblocking(int fd) {
  const int flags = fcntl(fd, F_GETFL, 0);
  if (flags < 0 || fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) throw Error(std::string("fcntl: ") + std::strerror(errno));
}

}  // namespace

struct Server::Connection {
  enum class Mode { detecting, handshake, raw, websocket };

  ClientId id = 0;
  int fd = -1;
  Mode mode = Mode::detecting;
  Clock::time_point accepted;
  std::string in;
  std::string out;
  std::deque<std::string> held;  // lines queued before the framing is known
  std::string fragment;
  bool closing = false;
  bool closed = false;

  std::size_t pending() const {
    std::size_t n = out.size();
    for (const auto& l : held) n += l.size();
    return n;
  }
};

Server::Server(GatewayCore& core, ServerOptions options) : core_(core), options_(std::move(options)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(options_.port);
  if (inet_pton(AF_INET, options_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw InputError("bad bind address '" + options_.bind_address + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw Error("cannot listen on " + options_.bind_address + ":" + std::to_string(options_.port) + ": " + err);
  }
  set_nonblocking(listen_fd_);
  socklen_t len = sizeof addr;
  getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Server::~Server() {
  for (auto& [id, c] : connections_) {
    if (!c->closed) ::close(c->fd);
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::accept_all() {
  for (;;) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    set_nonblocking(fd);
    const int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto c = std::make_unique<Connection>();
    c->fd = fd;
    c->accepted = Clock::now();
    c->id = core_.connect();
    connections_.emplace(c->id, std::move(c));
  }
}

void Server::queue(Connection& c, std::string_view line) {
  switch (c.mode) {
    case Connection::Mode::detecting:
    case Connection::Mode::handshake:
      c.held.emplace_back(line);
      break;
    case Connection::Mode::raw:
      c.out.append(line);
      c.out.push_back('\n');
      break;
    case Connection::Mode::websocket:
      c.out += ws::encode_frame(ws::Opcode::text, line);
      break;
  }
}

void Server::close(Connection& c) {
  if (c.closed) return;
  ::close(c.fd);
  c.closed = true;
  core_.disconnect(c.id);
}

void Server::read_from(Connection& c) {
  char buf[8192];
  for (;;) {
    const ssize_t n = ::recv(c.fd, buf, sizeof buf, 0);
    if (n > 0) {
      c.in.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) c.closing = true;
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) c.closing = true;
    break;
  }
  handle_input(c);
  if (c.closing && c.out.empty()) close(c);
}

void Server::handle_input(Connection& c) {
  using Mode = Connection::Mode;
  auto release_held = [&] {
    auto held = std::move(c.held);
    c.held.clear();
    for (const auto& l : held) queue(c, l);
  };
  if (c.mode == Mode::detecting) {
    const std::string_view prefix = "GET ";
    const std::size_t n = std::min(c.in.size(), prefix.size());
    if (n == 0) return;
    if (c.in.compare(0, n, prefix, 0, n) == 0) {
      if (n < prefix.size()) return;
      c.mode = Mode::handshake;
    } else {
      c.mode = Mode::raw;
      release_held();
    }
  }
  if (c.mode == Mode::handshake) {
    try {
      const auto key = ws::take_upgrade_request(c.in);
      if (!key) return;
      c.out += ws::upgrade_response(*key);
      c.mode = Mode::websocket;
      release_held();
    } catch (const InputError& e) {
      c.out += "HTTP/1.1 400 Bad Request\r\nContent-Type: text/plain\r\nConnection: close\r\n\r\n";
      c.out += e.what();
      c.closing = true;
      return;
    }
  }
  if (c.mode == Mode::raw) {
    std::size_t start = 0;
    for (std::size_t nl; (nl = c.in.find('\n', start)) != std::string::npos; start = nl + 1) {
      std::string_view line(c.in.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      core_.receive_line(c.id, line);
    }
    c.in.erase(0, start);
    if (c.in.size() > kMaxLine) c.closing = true;
    return;
  }
  if (c.mode == Mode::websocket) {
    try {
      while (auto frame = ws::take_frame(c.in)) {
        switch (frame->opcode) {
          case ws::Opcode::ping:
            c.out += ws::encode_frame(ws::Opcode::pong, frame->payload);
            break;
          case ws::Opcode::pong:
            break;
          case ws::Opcode::close:
            c.out += ws::encode_frame(ws::Opcode::close, frame->payload.substr(0, 2));
            c.closing = true;
            return;
          default:
            c.fragment += frame->payload;
            if (c.fragment.size() > kMaxLine) throw InputError("message too large");
            if (!frame->fin) break;
            {
              std::string_view text(c.fragment);
              std::size_t start = 0;
              for (;;) {
                const std::size_t nl = text.find('\n', start);
                const std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
                if (nl == std::string_view::npos || !line.empty()) core_.receive_line(c.id, line);
                if (nl == std::string_view::npos) break;
                start = nl + 1;
                if (start == text.size()) break;
              }
            }
            c.fragment.clear();
        }
      }
    } catch (const InputError&) {
      c.out += ws::encode_frame(ws::Opcode::close, std::string("\x03\xea", 2));
      c.closing = true;
    }
  }
}

void Server::flush(Connection& c) {
  while (!c.out.empty() && !c.closed) {
    const ssize_t n = ::send(c.fd, c.out.data(), c.out.size(), MSG_NOSIGNAL);
    if (n > 0) {
      c.out.erase(0, static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) return;
    close(c);
    return;
  }
  if (c.closing && c.out.empty()) close(c);
}

void Server::run() {
  const auto dt = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(core_.simulator().config().dt_s));
  auto next_tick = Clock::now();
  std::int64_t ticks = 0;
  std::vector<pollfd> fds;
  std::vector<Connection*> order;

  while (!stop_.load()) {
    if (options_.max_ticks && ticks >= *options_.max_ticks) break;

    bool can_step = false;
    int timeout_ms = 10;
    if (options_.realtime) {
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - Clock::now()).count();
      timeout_ms = static_cast<int>(std::clamp<long long>(wait, 0, 10));
    } else {
      can_step = !connections_.empty();
      for (const auto& [id, c] : connections_) {
        if (c->pending() > options_.max_pending_bytes) can_step = false;
        if (c->mode == Connection::Mode::detecting || c->mode == Connection::Mode::handshake) can_step = false;
      }
      if (can_step) timeout_ms = 0;
    }

    fds.clear();
    order.clear();
    fds.push_back({listen_fd_, POLLIN, 0});
    for (auto& [id, c] : connections_) {
      fds.push_back({c->fd, static_cast<short>(POLLIN | (c->out.empty() ? 0 : POLLOUT)), 0});
      order.push_back(c.get());
    }
    const int ready = ::poll(fds.data(), fds.size(), timeout_ms);
    if (ready < 0 && errno != EINTR) throw Error(std::string("poll: ") + std::strerror(errno));

    if (ready > 0) {
      for (std::size_t i = 0; i < order.size(); ++i) {
        const short ev = fds[i + 1].revents;
        if (ev & (POLLIN | POLLHUP | POLLERR)) read_from(*order[i]);
        if ((ev & POLLOUT) && !order[i]->closed) flush(*order[i]);
      }
      if (fds[0].revents & POLLIN) accept_all();
    }

    const auto now = Clock::now();
    for (auto& [id, c] : connections_) {
      if (c->mode == Connection::Mode::detecting && now - c->accepted >= kDetectTimeout) {
        c->mode = Connection::Mode::raw;
        auto held = std::move(c->held);
        c->held.clear();
        for (const auto& l : held) queue(*c, l);
      }
    }

    if (options_.realtime) {
      int n = 0;
      while (Clock::now() >= next_tick && n < 10) {
        if (options_.max_ticks && ticks >= *options_.max_ticks) break;
        core_.step();
        ++ticks;
        next_tick += dt;
        ++n;
      }
      if (n == 10 && Clock::now() >= next_tick) next_tick = Clock::now();
    } else if (can_step) {
      for (int n = 0; n < 5; ++n) {
        if (options_.max_ticks && ticks >= *options_.max_ticks) break;
        core_.step();
        ++ticks;
      }
    }

    for (auto& o : core_.drain_output()) {
      const auto it = connections_.find(o.client);
      if (it != connections_.end() && !it->second->closed) queue(*it->second, o.line);
    }
    for (auto& [id, c] : connections_) {
      if (c->closed) continue;
      if (c->pending() > 8 * options_.max_pending_bytes) {
        close(*c);
        continue;
      }
      flush(*c);
    }
    std::erase_if(connections_, [](const auto& kv) { return kv.second->closed; });
  }

  for (auto& o : core_.drain_output()) {
    const auto it = connections_.find(o.client);
    if (it != connections_.end() && !it->second->closed) queue(*it->second, o.line);
  }
  // Best-effort drain of what is already queued, then a graceful close so
  // unread client input does not turn into a reset that discards it.
  const auto deadline = Clock::now() + std::chrono::seconds(1);
  for (auto& [id, c] : connections_) {
    if (c->closed || c->mode != Connection::Mode::detecting) continue;
    c->mode = Connection::Mode::raw;
    auto held = std::move(c->held);
    c->held.clear();
    for (const auto& l : held) queue(*c, l);
  }
  for (;;) {
    fds.clear();
    order.clear();
    for (auto& [id, c] : connections_) {
      if (c->closed) continue;
      if (c->out.empty() && !c->closing) {
        ::shutdown(c->fd, SHUT_WR);
        c->closing = true;
      }
      fds.push_back({c->fd, static_cast<short>(POLLIN | (c->out.empty() ? 0 : POLLOUT)), 0});
      order.push_back(c.get());
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (fds.empty() || left <= 0) break;
    if (::poll(fds.data(), fds.size(), static_cast<int>(left)) <= 0) break;
    for (std::size_t i = 0; i < order.size(); ++i) {
      Connection& c = *order[i];
      if (fds[i].revents & POLLOUT) flush(c);
      if (c.closed || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char sink[4096];
      const ssize_t n = ::recv(c.fd, sink, sizeof sink, 0);
      if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) close(c);
    }
  }
  for (auto& [id, c] : connections_) close(*c);
  connections_.clear();
}

}  // namespace eversim::gateway
