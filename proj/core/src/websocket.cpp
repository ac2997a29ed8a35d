#include "eversim/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

#include "eversim/error.hpp"

namespace eversim::ws {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string accept_key(std::string_view client_key) {
  std::string input(client_key);
  input += kGuid;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char encoded[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(encoded, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<const char*>(encoded), static_cast<std::size_t>(n));
}

std::optional<std::string> take_upgrade_request(std::string& buffer) {
  const auto end = buffer.find("\r\n\r\n");
  if (end == std::string::npos) {
    if (buffer.size() > 16384) throw InputError("HTTP request head too large");
    return std::nullopt;
  }
  const std::string_view head(buffer.data(), end);
  if (head.substr(0, 4) != "GET ") throw InputError("expected an HTTP GET upgrade request");
  std::optional<std::string> key;
  bool upgrade = false;
  std::size_t pos = head.find("\r\n");
  while (pos != std::string_view::npos && pos < head.size()) {
    const std::size_t start = pos + 2;
    std::size_t next = head.find("\r\n", start);
    const std::string_view line = head.substr(start, next == std::string_view::npos ? head.size() - start : next - start);
    const auto colon = line.find(':');
    if (colon != std::string_view::npos) {
      const std::string name = lower(trim(line.substr(0, colon)));
      const std::string_view value = trim(line.substr(colon + 1));
      if (name == "sec-websocket-key") key = std::string(value);
      if (name == "upgrade" && lower(value) == "websocket") upgrade = true;
    }
    pos = next;
  }
  if (!upgrade) throw InputError("missing 'Upgrade: websocket' header");
  if (!key || key->empty()) throw InputError("missing Sec-WebSocket-Key header");
  buffer.erase(0, end + 4);
  return key;
}

std::string upgrade_response(std::string_view client_key) {
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " +
         accept_key(client_key) + "\r\n\r\n";
}

std::optional<Frame> take_frame(std::string& buffer, std::size_t max_payload) {
  if (buffer.size() < 2) return std::nullopt;
  const auto b0 = static_cast<unsigned char>(buffer[0]);
  const auto b1 = static_cast<unsigned char>(buffer[1]);
  if (b0 & 0x70) throw InputError("reserved websocket bits set");
  Frame f;
  f.fin = (b0 & 0x80) != 0;
  const unsigned op = b0 & 0x0F;
  if (op != 0x0 && op != 0x1 && op != 0x2 && op != 0x8 && op != 0x9 && op != 0xA) {
    throw InputError("unknown websocket opcode " + std::to_string(op));
  }
  f.opcode = static_cast<Opcode>(op);
  const bool masked = (b1 & 0x80) != 0;
  std::uint64_t len = b1 & 0x7F;
  std::size_t pos = 2;
  if (len == 126) {
    if (buffer.size() < 4) return std::nullopt;
    len = (static_cast<std::uint64_t>(static_cast<unsigned char>(buffer[2])) << 8) |
          static_cast<unsigned char>(buffer[3]);
    pos = 4;
  } else if (len == 127) {
    if (buffer.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<unsigned char>(buffer[2 + i]);
    pos = 10;
  }
  if (len > max_payload) throw InputError("websocket frame too large");
  if (op >= 0x8 && (len > 125 || !f.fin)) throw InputError("malformed websocket control frame");
  unsigned char mask[4] = {0, 0, 0, 0};
  if (masked) {
    if (buffer.size() < pos + 4) return std::nullopt;
    for (int i = 0; i < 4; ++i) mask[i] = static_cast<unsigned char>(buffer[pos + i]);
    pos += 4;
  }
  if (buffer.size() < pos + len) return std::nullopt;
  f.payload = buffer.substr(pos, len);
  if (masked) {
    for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ mask[i % 4]);
  }
  buffer.erase(0, pos + len);
  return f;
}

std::string encode_frame(Opcode opcode, std::string_view payload, std::optional<std::uint32_t> mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<unsigned>(opcode)));
  const unsigned char mask_bit = mask ? 0x80 : 0x00;
  const std::uint64_t len = payload.size();
  if (len < 126) {
    out.push_back(static_cast<char>(mask_bit | len));
  } else if (len <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((len >> 8) & 0xFF));
    out.push_back(static_cast<char>(len & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  }
  if (!mask) {
    out.append(payload);
    return out;
  }
  const unsigned char m[4] = {static_cast<unsigned char>(*mask >> 24), static_cast<unsigned char>(*mask >> 16),
                              static_cast<unsigned char>(*mask >> 8), static_cast<unsigned char>(*mask)};
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(m[i]));
  for (std::size_t i = 0; i < payload.size(); ++i) out.push_back(static_cast<char>(payload[i] ^ m[i % 4]));
  return out;
}

}  // namespace eversim::ws
