#pragma once

// Minimal RFC 6455 pieces the gateway needs so a browser can connect:
// the opening handshake and text/control frame codec. No extensions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eversim::ws {

enum class Opcode : std::uint8_t { continuation = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

struct Frame {
  bool fin = true;
  Opcode opcode = Opcode::text;
  std::string payload;
};

// base64(SHA-1(key + RFC 6455 GUID)).
std::string accept_key(std::string_view client_key);

// Once `buffer` holds a complete HTTP request head, returns its
// Sec-WebSocket-Key and erases the head. Throws InputError when the request
// is not a WebSocket upgrade.
std::optional<std::string> take_upgrade_request(std::string& buffer);
std::string upgrade_response(std::string_view client_key);

// Consumes one frame from the front of `buffer` when complete. Throws
// InputError on malformed frames or payloads above `max_payload`.
std::optional<Frame> take_frame(std::string& buffer, std::size_t max_payload = 1 << 20);

// Server frames are unmasked; clients must pass a mask.
std::string encode_frame(Opcode opcode, std::string_view payload, std::optional<std::uint32_t> mask = std::nullopt);

}  // namespace eversim::ws
